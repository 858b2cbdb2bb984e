#include "weaverec/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace weaverec {

namespace {

struct SliceAccumulator {
  std::size_t count = 0;
  double sum_row = 0.0;
  double sum_col = 0.0;
};

// yarn -> frame -> accumulator, ordered so outputs are deterministic.
using PresenceMap = std::map<std::uint16_t, std::map<int, SliceAccumulator>>;

PresenceMap accumulate_slices(const VoxelVolume& volume) {
  PresenceMap presence;
  for (std::uint32_t z = 0; z < volume.nz; ++z) {
    const std::size_t base = static_cast<std::size_t>(z) * volume.nx * volume.ny;
    for (std::uint32_t y = 0; y < volume.ny; ++y) {
      for (std::uint32_t x = 0; x < volume.nx; ++x) {
        const std::uint16_t label = volume.labels[base + static_cast<std::size_t>(y) * volume.nx + x];
        if (label == 0) continue;
        auto& acc = presence[label][static_cast<int>(z)];
        ++acc.count;
        acc.sum_row += y;
        acc.sum_col += x;
      }
    }
  }
  return presence;
}

std::array<double, 3> normalized(double dx, double dy, double dz) {
  const double norm = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (norm == 0.0) return {0.0, 0.0, 1.0};
  return {dx / norm, dy / norm, dz / norm};
}

}  // namespace

std::vector<YarnPath> extract_paths(const VoxelVolume& volume) {
  volume.validate();
  const PresenceMap presence = accumulate_slices(volume);

  std::vector<YarnPath> paths;
  paths.reserve(presence.size());
  for (const auto& [yarn, slices] : presence) {
    YarnPath path;
    path.yarn = yarn;
    path.points.reserve(slices.size());
    for (const auto& [frame, acc] : slices) {
      PathPoint p;
      p.frame = frame;
      p.x_um = acc.sum_col / acc.count * volume.pixel_size_um;
      p.y_um = acc.sum_row / acc.count * volume.pixel_size_um;
      p.z_um = frame * volume.depth_step_um;
      path.points.push_back(p);
    }

    const std::size_t n = path.points.size();
    path.tangents.resize(n);
    if (n == 1) {
      path.tangents[0] = {0.0, 0.0, 1.0};  // single slice: scan-axis direction
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const PathPoint& fwd = path.points[std::min(i + 1, n - 1)];
        const PathPoint& bwd = path.points[i == 0 ? 0 : i - 1];
        path.tangents[i] = normalized(fwd.x_um - bwd.x_um, fwd.y_um - bwd.y_um, fwd.z_um - bwd.z_um);
      }
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

ContactMap contact_regions(const VoxelVolume& volume) {
  volume.validate();
  const double side_face = volume.pixel_size_um * volume.depth_step_um;  // normal perpendicular to z
  const double z_face = volume.pixel_size_um * volume.pixel_size_um;     // normal along z

  ContactMap contacts;
  auto add = [&contacts](std::uint16_t a, std::uint16_t b, double area) {
    if (a == 0 || b == 0 || a == b) return;
    contacts[{std::min(a, b), std::max(a, b)}] += area;
  };

  const std::size_t slice = static_cast<std::size_t>(volume.nx) * volume.ny;
  for (std::uint32_t z = 0; z < volume.nz; ++z) {
    const std::size_t base = z * slice;
    for (std::uint32_t y = 0; y < volume.ny; ++y) {
      const std::size_t row = base + static_cast<std::size_t>(y) * volume.nx;
      for (std::uint32_t x = 0; x < volume.nx; ++x) {
        const std::uint16_t c = volume.labels[row + x];
        if (x + 1 < volume.nx) add(c, volume.labels[row + x + 1], side_face);
        if (y + 1 < volume.ny) add(c, volume.labels[row + volume.nx + x], side_face);
        if (z + 1 < volume.nz) add(c, volume.labels[row + slice + x], z_face);
      }
    }
  }
  return contacts;
}

AreaDistribution area_distribution(const VoxelVolume& volume, int bin_count) {
  volume.validate();
  const PresenceMap presence = accumulate_slices(volume);
  const double pixel_area = volume.pixel_size_um * volume.pixel_size_um;

  AreaDistribution out;
  for (const auto& [yarn, slices] : presence)
    for (const auto& [frame, acc] : slices)
      out.records.push_back({yarn, frame, acc.count, acc.count * pixel_area});

  if (out.records.empty()) {
    out.summary = {0.0, 0.0, 0.0, 0.0};
    return out;
  }

  double sum = 0.0, min_v = out.records.front().area_um2, max_v = min_v;
  for (const AreaRecord& r : out.records) {
    sum += r.area_um2;
    min_v = std::min(min_v, r.area_um2);
    max_v = std::max(max_v, r.area_um2);
  }
  const double n = static_cast<double>(out.records.size());
  const double mean = sum / n;
  double var = 0.0;
  for (const AreaRecord& r : out.records) var += (r.area_um2 - mean) * (r.area_um2 - mean);
  out.summary = {mean, std::sqrt(var / n), min_v, max_v};

  int bins = bin_count;
  if (bins <= 0)  // Sturges' rule
    bins = static_cast<int>(std::ceil(std::log2(n))) + 1;
  bins = std::max(bins, 1);

  if (max_v == min_v) {
    out.histogram.edges = {min_v, min_v + 1.0};
    out.histogram.counts = {out.records.size()};
    return out;
  }

  const double width = (max_v - min_v) / bins;
  out.histogram.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) out.histogram.edges[i] = min_v + i * width;
  out.histogram.counts.assign(bins, 0);
  for (const AreaRecord& r : out.records) {
    int slot = static_cast<int>((r.area_um2 - min_v) / width);
    slot = std::clamp(slot, 0, bins - 1);  // max value lands in the last bin
    ++out.histogram.counts[slot];
  }
  return out;
}

}  // namespace weaverec
