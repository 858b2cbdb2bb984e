#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "weaverec/volume.hpp"

namespace weaverec {

struct PathPoint {
  int frame = 0;
  double x_um = 0.0;
  double y_um = 0.0;
  double z_um = 0.0;
};

// Per-slice centroids of one yarn in physical units, ordered by z, with
// unit tangents by central differences (one-sided at the endpoints; a
// single-slice yarn gets the scan-axis direction).
struct YarnPath {
  std::uint16_t yarn = 0;
  std::vector<PathPoint> points;
  std::vector<std::array<double, 3>> tangents;
};

std::vector<YarnPath> extract_paths(const VoxelVolume& volume);

struct YarnPair {
  std::uint16_t a = 0;  // a < b always
  std::uint16_t b = 0;
  auto operator<=>(const YarnPair&) const = default;
};

// Shared-face contact areas between 6-connected voxels of distinct yarns.
// Faces normal to x or y contribute pixel_size*depth_step, faces normal to
// z contribute pixel_size^2.
using ContactMap = std::map<YarnPair, double>;

ContactMap contact_regions(const VoxelVolume& volume);

struct AreaRecord {
  std::uint16_t yarn = 0;
  int frame = 0;
  std::size_t pixel_count = 0;
  double area_um2 = 0.0;
};

struct Histogram {
  std::vector<double> edges;   // bin_count + 1 ascending edges
  std::vector<std::size_t> counts;
};

struct AreaSummary {
  double mean = 0.0;
  double stddev = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
};

struct AreaDistribution {
  std::vector<AreaRecord> records;  // one per (yarn, frame of presence)
  Histogram histogram;
  AreaSummary summary;
};

// bin_count 0 selects Sturges' rule: ceil(log2 n) + 1.
AreaDistribution area_distribution(const VoxelVolume& volume, int bin_count = 0);

}  // namespace weaverec
