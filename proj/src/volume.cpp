#include "weaverec/volume.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace weaverec {

namespace {

constexpr char kMagic[4] = {'L', 'V', 'O', 'L'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  const std::uint8_t bytes[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                                 static_cast<std::uint8_t>(v >> 16),
                                 static_cast<std::uint8_t>(v >> 24)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t read_u32(std::istream& in) {
  std::uint8_t bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  std::uint8_t bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<std::uint8_t>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_f64(std::istream& in) {
  std::uint8_t bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace

LabelFrame VoxelVolume::slice(std::uint32_t z) const {
  LabelFrame frame(static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(z));
  const std::size_t offset = static_cast<std::size_t>(z) * nx * ny;
  std::copy(labels.begin() + offset, labels.begin() + offset + static_cast<std::size_t>(nx) * ny,
            frame.labels.begin());
  return frame;
}

void VoxelVolume::validate() const {
  if (nx == 0 || ny == 0 || nz == 0) throw data_error("volume dimensions must be positive");
  if (pixel_size_um <= 0.0 || depth_step_um <= 0.0)
    throw data_error("volume physical sizes must be positive");
  if (labels.size() != voxel_count()) throw data_error("volume label grid length mismatch");
}

VoxelVolume assemble_volume(const std::vector<LabelFrame>& frames, double pixel_size_um,
                            double depth_step_um) {
  if (frames.empty()) throw data_error("cannot assemble an empty stack");
  const int w = frames.front().width;
  const int h = frames.front().height;

  VoxelVolume volume;
  volume.nx = static_cast<std::uint32_t>(w);
  volume.ny = static_cast<std::uint32_t>(h);
  volume.nz = static_cast<std::uint32_t>(frames.size());
  volume.pixel_size_um = pixel_size_um;
  volume.depth_step_um = depth_step_um;
  volume.labels.reserve(volume.voxel_count());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    frames[k].validate();
    if (frames[k].width != w || frames[k].height != h)
      throw data_error("dimension mismatch at frame " + std::to_string(k));
    volume.labels.insert(volume.labels.end(), frames[k].labels.begin(), frames[k].labels.end());
  }
  volume.validate();
  return volume;
}

VoxelVolume assemble_volume(const TrackedStack& tracked, const DatasetManifest& manifest) {
  return assemble_volume(tracked.frames, manifest.pixel_size_um, manifest.depth_step_um);
}

void export_volume(const VoxelVolume& volume, const std::filesystem::path& path) {
  volume.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write volume " + path.string());

  out.write(kMagic, 4);
  write_u32(out, kFormatVersion);
  write_u32(out, volume.nx);
  write_u32(out, volume.ny);
  write_u32(out, volume.nz);
  write_f64(out, volume.pixel_size_um);
  write_f64(out, volume.depth_step_um);

  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(volume.labels.data()),
              static_cast<std::streamsize>(volume.labels.size() * sizeof(std::uint16_t)));
  } else {
    for (std::uint16_t v : volume.labels) {
      const char bytes[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
      out.write(bytes, 2);
    }
  }
  if (!out) throw io_error("write failed for volume " + path.string());
}

VoxelVolume import_volume(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open volume " + path.string());

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw data_error("not an LVOL file: " + path.string());
  const std::uint32_t version = read_u32(in);
  if (version != kFormatVersion)
    throw data_error("unsupported LVOL version " + std::to_string(version));

  VoxelVolume volume;
  volume.nx = read_u32(in);
  volume.ny = read_u32(in);
  volume.nz = read_u32(in);
  volume.pixel_size_um = read_f64(in);
  volume.depth_step_um = read_f64(in);
  if (!in) throw io_error("truncated LVOL header in " + path.string());

  const std::size_t count = static_cast<std::size_t>(volume.nx) * volume.ny * volume.nz;
  volume.labels.resize(count);
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(volume.labels.data()),
            static_cast<std::streamsize>(count * sizeof(std::uint16_t)));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint8_t bytes[2];
      in.read(reinterpret_cast<char*>(bytes), 2);
      volume.labels[i] = static_cast<std::uint16_t>(bytes[0] | (bytes[1] << 8));
    }
  }
  if (!in) throw io_error("truncated LVOL payload in " + path.string());
  volume.validate();
  return volume;
}

void export_volume_vtk(const VoxelVolume& volume, const std::filesystem::path& path) {
  volume.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot write " + path.string());

  out << "# vtk DataFile Version 3.0\n";
  out << "yarn label volume\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << volume.nx << " " << volume.ny << " " << volume.nz << "\n";
  out << "ORIGIN 0 0 0\n";
  out << "SPACING " << volume.pixel_size_um << " " << volume.pixel_size_um << " "
      << volume.depth_step_um << "\n";
  out << "POINT_DATA " << volume.voxel_count() << "\n";
  out << "SCALARS yarn_id unsigned_short 1\n";
  out << "LOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < volume.labels.size(); ++i) {
    out << volume.labels[i];
    out << ((i + 1) % 16 == 0 ? '\n' : ' ');
  }
  if (volume.labels.size() % 16 != 0) out << '\n';
  if (!out) throw io_error("write failed for " + path.string());
}

}  // namespace weaverec
