#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "weaverec/dataset_io.hpp"
#include "weaverec/tracker.hpp"

namespace weaverec {

// Dense z-major labeled voxel grid; slice z equals frame z's grid exactly.
struct VoxelVolume {
  std::uint32_t nx = 0;  // width
  std::uint32_t ny = 0;  // height
  std::uint32_t nz = 0;  // frame count
  double pixel_size_um = 0.0;
  double depth_step_um = 0.0;
  std::vector<std::uint16_t> labels;  // z-major, then row-major

  std::uint16_t at(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
    return labels[(static_cast<std::size_t>(z) * ny + y) * nx + x];
  }
  std::size_t voxel_count() const { return static_cast<std::size_t>(nx) * ny * nz; }
  LabelFrame slice(std::uint32_t z) const;
  void validate() const;
};

VoxelVolume assemble_volume(const TrackedStack& tracked, const DatasetManifest& manifest);
VoxelVolume assemble_volume(const std::vector<LabelFrame>& frames, double pixel_size_um,
                            double depth_step_um);

// LVOL: magic "LVOL", u32 version, u32 nx/ny/nz, f64 pixel_size_um and
// depth_step_um, then nx*ny*nz u16 labels, all little-endian.
void export_volume(const VoxelVolume& volume, const std::filesystem::path& path);
VoxelVolume import_volume(const std::filesystem::path& path);

// Legacy-text structured-points export for visualization tools.
void export_volume_vtk(const VoxelVolume& volume, const std::filesystem::path& path);

}  // namespace weaverec
