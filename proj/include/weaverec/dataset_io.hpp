#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "weaverec/errors.hpp"

namespace weaverec {

enum class ClassLabel { kWeft, kWarp };

std::string to_string(ClassLabel c);
ClassLabel class_from_string(const std::string& s);

// Instance ID -> yarn class. Keys refer to whichever labeling regime the
// stack is currently in (frame-local before tracking, global after).
using ClassMap = std::map<std::uint16_t, ClassLabel>;

// One 2D grid of instance labels, 0 = background. Immutable by convention
// once handed to a consumer; all per-frame algorithms take it by const ref.
struct LabelFrame {
  int width = 0;
  int height = 0;
  int frame_index = 0;
  std::vector<std::uint16_t> labels;  // row-major, height*width entries

  LabelFrame() = default;
  LabelFrame(int w, int h, int index);

  std::uint16_t at(int row, int col) const { return labels[static_cast<std::size_t>(row) * width + col]; }
  std::uint16_t& at(int row, int col) { return labels[static_cast<std::size_t>(row) * width + col]; }
  bool in_bounds(int row, int col) const { return row >= 0 && row < height && col >= 0 && col < width; }

  void validate() const;  // throws data_error on invariant violation
};

// One 2D grid of intensities in [0,1].
struct GreyFrame {
  int width = 0;
  int height = 0;
  std::vector<double> intensities;  // row-major

  GreyFrame() = default;
  GreyFrame(int w, int h, double fill = 0.0);

  double at(int row, int col) const { return intensities[static_cast<std::size_t>(row) * width + col]; }
  double& at(int row, int col) { return intensities[static_cast<std::size_t>(row) * width + col]; }

  void validate() const;
};

// Ordered frame list plus physical metadata. Paths may be relative; they
// resolve against base_dir (set to the manifest file's directory on load).
struct DatasetManifest {
  std::vector<std::filesystem::path> frame_paths;
  std::vector<std::filesystem::path> ground_truth_paths;  // optional, parallel to frame_paths
  double pixel_size_um = 0.0;
  double depth_step_um = 0.0;
  ClassMap class_map;
  std::filesystem::path base_dir;

  bool has_ground_truth() const { return !ground_truth_paths.empty(); }
  std::filesystem::path resolve(const std::filesystem::path& p) const;
  void validate() const;
};

enum class StackKind { kPredictions, kGroundTruth };

// Manifest file: UTF-8 text, one `key = value` pair per line, `#` comments.
// Keys: pixel_size_um, depth_step_um, frame (repeated), ground_truth
// (repeated), class (repeated, value "<id> <weft|warp>"). Unknown keys are
// errors; every diagnostic carries the line number and key name.
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

std::vector<LabelFrame> load_label_stack(const DatasetManifest& manifest, StackKind which);

// Writes one 16-bit grayscale PNG per frame into `directory` (created if
// absent) as <prefix>NNNN.png. Round-trips bit-exactly through
// read_label_png / load_label_stack.
std::vector<std::filesystem::path> save_label_stack(const std::vector<LabelFrame>& frames,
                                                    const std::filesystem::path& directory,
                                                    const std::string& prefix = "frame_");

LabelFrame read_label_png(const std::filesystem::path& path, int frame_index);
void write_label_png(const LabelFrame& frame, const std::filesystem::path& path);

GreyFrame read_grey_png(const std::filesystem::path& path);
void write_grey_png(const GreyFrame& frame, const std::filesystem::path& path);

// Exact pixel tally per nonzero label present in the frame.
std::map<std::uint16_t, std::size_t> instances_in_frame(const LabelFrame& frame);

}  // namespace weaverec
