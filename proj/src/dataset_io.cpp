#include "weaverec/dataset_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace weaverec {

namespace {

std::string format_index(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", index);
  return buf;
}

// RAII around FILE* so the setjmp error paths below cannot leak handles.
struct FileHandle {
  std::FILE* f = nullptr;
  explicit FileHandle(const std::filesystem::path& path, const char* mode)
      : f(std::fopen(path.string().c_str(), mode)) {}
  ~FileHandle() {
    if (f) std::fclose(f);
  }
  FileHandle(const FileHandle&) = delete;
  FileHandle& operator=(const FileHandle&) = delete;
};

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

// Reads a single-channel 8- or 16-bit grayscale PNG into 16-bit samples
// without value scaling (an 8-bit label 3 stays 3).
void read_grey16(const std::filesystem::path& path, int& width, int& height,
                 std::vector<std::uint16_t>& samples, int& bit_depth) {
  FileHandle file(path, "rb");
  if (!file.f) throw io_error("cannot open image " + path.string());

  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw io_error("libpng read init failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw io_error("libpng info init failed");

  // Declared before setjmp so the longjmp error path still unwinds them.
  std::vector<std::uint8_t> raw;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(r.png))) throw io_error("failed to decode " + path.string());

  png_init_io(r.png, file.f);
  png_read_info(r.png, r.info);

  const int color_type = png_get_color_type(r.png, r.info);
  bit_depth = png_get_bit_depth(r.png, r.info);
  if (color_type != PNG_COLOR_TYPE_GRAY)
    throw data_error("image is not single-channel grayscale: " + path.string());
  if (bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(r.png);
    bit_depth = 8;
  }
  if (bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(r.png);
  png_read_update_info(r.png, r.info);

  width = static_cast<int>(png_get_image_width(r.png, r.info));
  height = static_cast<int>(png_get_image_height(r.png, r.info));
  const std::size_t row_bytes = png_get_rowbytes(r.png, r.info);
  raw.resize(static_cast<std::size_t>(height) * row_bytes);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = raw.data() + static_cast<std::size_t>(y) * row_bytes;
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);

  samples.resize(static_cast<std::size_t>(width) * height);
  if (bit_depth == 16) {
    std::memcpy(samples.data(), raw.data(), samples.size() * sizeof(std::uint16_t));
  } else {
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = raw[i];
  }
}

void write_grey16(const std::filesystem::path& path, int width, int height,
                  const std::uint16_t* samples) {
  FileHandle file(path, "wb");
  if (!file.f) throw io_error("cannot write image " + path.string());

  PngWriter w;
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!w.png) throw io_error("libpng write init failed");
  w.info = png_create_info_struct(w.png);
  if (!w.info) throw io_error("libpng info init failed");

  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(w.png))) throw io_error("failed to encode " + path.string());

  png_init_io(w.png, file.f);
  png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  if (std::endian::native == std::endian::little) png_set_swap(w.png);

  rows.resize(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = reinterpret_cast<png_bytep>(const_cast<std::uint16_t*>(samples) +
                                          static_cast<std::size_t>(y) * width);
  }
  png_write_image(w.png, rows.data());
  png_write_end(w.png, w.info);
}

[[noreturn]] void manifest_error(const std::filesystem::path& path, int line,
                                 const std::string& key, const std::string& what) {
  std::ostringstream oss;
  oss << path.string() << ":" << line;
  if (!key.empty()) oss << " (key '" << key << "')";
  oss << ": " << what;
  throw data_error(oss.str());
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_string(ClassLabel c) { return c == ClassLabel::kWeft ? "weft" : "warp"; }

ClassLabel class_from_string(const std::string& s) {
  if (s == "weft") return ClassLabel::kWeft;
  if (s == "warp") return ClassLabel::kWarp;
  throw data_error("unknown class label '" + s + "' (expected weft or warp)");
}

LabelFrame::LabelFrame(int w, int h, int index)
    : width(w), height(h), frame_index(index),
      labels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {
  validate();
}

void LabelFrame::validate() const {
  if (width <= 0 || height <= 0) throw data_error("label frame dimensions must be positive");
  if (labels.size() != static_cast<std::size_t>(width) * height)
    throw data_error("label grid length does not equal width x height");
}

GreyFrame::GreyFrame(int w, int h, double fill)
    : width(w), height(h), intensities(static_cast<std::size_t>(w) * h, fill) {
  validate();
}

void GreyFrame::validate() const {
  if (width <= 0 || height <= 0) throw data_error("grey frame dimensions must be positive");
  if (intensities.size() != static_cast<std::size_t>(width) * height)
    throw data_error("intensity grid length does not equal width x height");
  for (double v : intensities)
    if (!(v >= 0.0 && v <= 1.0)) throw data_error("grey intensity outside [0,1]");
}

std::filesystem::path DatasetManifest::resolve(const std::filesystem::path& p) const {
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

void DatasetManifest::validate() const {
  if (frame_paths.empty()) throw data_error("manifest: empty frame list");
  if (pixel_size_um <= 0.0) throw data_error("manifest: pixel_size_um must be positive");
  if (depth_step_um <= 0.0) throw data_error("manifest: depth_step_um must be positive");
  if (!ground_truth_paths.empty() && ground_truth_paths.size() != frame_paths.size())
    throw data_error("manifest: ground truth length mismatch (" +
                     std::to_string(ground_truth_paths.size()) + " vs " +
                     std::to_string(frame_paths.size()) + " frames)");
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open manifest " + path.string());

  DatasetManifest m;
  m.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

  std::string line;
  int line_no = 0;
  bool saw_pixel = false, saw_depth = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) manifest_error(path, line_no, "", "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) manifest_error(path, line_no, "", "missing key before '='");
    if (value.empty()) manifest_error(path, line_no, key, "missing value");

    if (key == "pixel_size_um" || key == "depth_step_um") {
      double v = 0.0;
      std::size_t used = 0;
      try {
        v = std::stod(value, &used);
      } catch (const std::exception&) {
        manifest_error(path, line_no, key, "not a number: '" + value + "'");
      }
      if (used != value.size()) manifest_error(path, line_no, key, "trailing junk after number");
      if (!(v > 0.0)) manifest_error(path, line_no, key, "must be positive");
      (key == "pixel_size_um" ? m.pixel_size_um : m.depth_step_um) = v;
      (key == "pixel_size_um" ? saw_pixel : saw_depth) = true;
    } else if (key == "frame") {
      m.frame_paths.emplace_back(value);
    } else if (key == "ground_truth") {
      m.ground_truth_paths.emplace_back(value);
    } else if (key == "class") {
      std::istringstream iss(value);
      long id = -1;
      std::string cls;
      if (!(iss >> id >> cls))
        manifest_error(path, line_no, key, "expected '<id> <weft|warp>', got '" + value + "'");
      std::string extra;
      if (iss >> extra) manifest_error(path, line_no, key, "trailing junk '" + extra + "'");
      if (id < 1 || id > 65535)
        manifest_error(path, line_no, key, "instance id out of 16-bit range: " + std::to_string(id));
      ClassLabel label;
      try {
        label = class_from_string(cls);
      } catch (const data_error& e) {
        manifest_error(path, line_no, key, e.what());
      }
      const auto [it, inserted] = m.class_map.emplace(static_cast<std::uint16_t>(id), label);
      if (!inserted && it->second != label)
        manifest_error(path, line_no, key, "conflicting class for id " + std::to_string(id));
    } else {
      manifest_error(path, line_no, key, "unknown key");
    }
  }

  if (!saw_pixel) throw data_error(path.string() + ": missing key 'pixel_size_um'");
  if (!saw_depth) throw data_error(path.string() + ": missing key 'depth_step_um'");
  m.validate();
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  manifest.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot write manifest " + path.string());
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", manifest.pixel_size_um);
  out << "pixel_size_um = " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.9g", manifest.depth_step_um);
  out << "depth_step_um = " << buf << "\n";
  for (const auto& p : manifest.frame_paths) out << "frame = " << p.generic_string() << "\n";
  for (const auto& p : manifest.ground_truth_paths)
    out << "ground_truth = " << p.generic_string() << "\n";
  for (const auto& [id, cls] : manifest.class_map)
    out << "class = " << id << " " << to_string(cls) << "\n";
  if (!out) throw io_error("write failed for manifest " + path.string());
}

LabelFrame read_label_png(const std::filesystem::path& path, int frame_index) {
  int width = 0, height = 0, bit_depth = 0;
  std::vector<std::uint16_t> samples;
  read_grey16(path, width, height, samples, bit_depth);
  LabelFrame frame;
  frame.width = width;
  frame.height = height;
  frame.frame_index = frame_index;
  frame.labels = std::move(samples);
  frame.validate();
  return frame;
}

void write_label_png(const LabelFrame& frame, const std::filesystem::path& path) {
  frame.validate();
  write_grey16(path, frame.width, frame.height, frame.labels.data());
}

GreyFrame read_grey_png(const std::filesystem::path& path) {
  int width = 0, height = 0, bit_depth = 0;
  std::vector<std::uint16_t> samples;
  read_grey16(path, width, height, samples, bit_depth);
  GreyFrame frame;
  frame.width = width;
  frame.height = height;
  frame.intensities.resize(samples.size());
  const double scale = bit_depth == 16 ? 65535.0 : 255.0;
  for (std::size_t i = 0; i < samples.size(); ++i) frame.intensities[i] = samples[i] / scale;
  frame.validate();
  return frame;
}

void write_grey_png(const GreyFrame& frame, const std::filesystem::path& path) {
  frame.validate();
  std::vector<std::uint16_t> samples(frame.intensities.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    samples[i] = static_cast<std::uint16_t>(std::lround(frame.intensities[i] * 65535.0));
  write_grey16(path, frame.width, frame.height, samples.data());
}

std::vector<LabelFrame> load_label_stack(const DatasetManifest& manifest, StackKind which) {
  manifest.validate();
  const auto& paths =
      which == StackKind::kPredictions ? manifest.frame_paths : manifest.ground_truth_paths;
  if (paths.empty()) throw data_error("manifest has no ground truth paths");

  std::vector<LabelFrame> frames;
  frames.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    LabelFrame frame = read_label_png(manifest.resolve(paths[i]), static_cast<int>(i));
    if (!frames.empty() &&
        (frame.width != frames.front().width || frame.height != frames.front().height)) {
      throw data_error("dimension mismatch at frame " + std::to_string(i) + ": " +
                       std::to_string(frame.width) + "x" + std::to_string(frame.height) + " vs " +
                       std::to_string(frames.front().width) + "x" +
                       std::to_string(frames.front().height));
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<std::filesystem::path> save_label_stack(const std::vector<LabelFrame>& frames,
                                                    const std::filesystem::path& directory,
                                                    const std::string& prefix) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw io_error("cannot create directory " + directory.string() + ": " + ec.message());

  std::vector<std::filesystem::path> paths;
  paths.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto path = directory / (prefix + format_index(static_cast<int>(i)) + ".png");
    write_label_png(frames[i], path);
    paths.push_back(path);
  }
  return paths;
}

std::map<std::uint16_t, std::size_t> instances_in_frame(const LabelFrame& frame) {
  std::map<std::uint16_t, std::size_t> counts;
  for (std::uint16_t label : frame.labels)
    if (label != 0) ++counts[label];
  return counts;
}

}  // namespace weaverec
