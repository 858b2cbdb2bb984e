#pragma once

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "weaverec/dataset_io.hpp"

namespace weaverec {

// Parameters of a synthetic multi-ply plain weave. Warp yarns run along the
// frame axis (one crimped elliptical cross-section per frame); weft yarns
// run in-plane as full-width bands occupying a contiguous frame interval.
struct WeaveSpec {
  int n_weft_layers = 1;
  int n_weft_per_layer = 1;
  int n_warp = 1;
  double half_axis_a = 8.0;  // along x for warp sections, along z for weft tubes
  double half_axis_b = 4.0;  // along y
  double crimp_amplitude = 6.0;   // pixels
  double crimp_wavelength = 50.0; // frames
  int frame_width = 256;
  int frame_height = 512;
  int n_frames = 100;
  double pixel_size_um = 16.1;
  double depth_step_um = 16.1;
  std::uint64_t seed = 0;

  int yarn_count() const { return n_weft_layers * n_weft_per_layer + n_warp; }
  void validate() const;
};

// Analytic path of one warp yarn: y(z) = center_y + amplitude * sin(2*pi*z /
// wavelength + phase) at fixed center_x.
struct WarpCurve {
  std::uint16_t yarn = 0;
  double center_x = 0.0;
  double center_y = 0.0;
  double amplitude = 0.0;
  double wavelength = 0.0;
  double phase = 0.0;

  double y_at(int frame) const;
};

// Exact generator-side truth: analytic warp curves plus the realized
// face-adjacency set of the rasterized stack (computed by a direct
// 6-neighborhood scan, independent of the volume-analysis contact map).
struct WeaveTruth {
  std::vector<WarpCurve> warp_curves;
  std::set<std::pair<std::uint16_t, std::uint16_t>> adjacency;  // lo < hi
};

struct GeneratedWeave {
  std::vector<LabelFrame> predictions;
  std::vector<LabelFrame> ground_truth;
  DatasetManifest manifest;  // default relative paths, filled physical metadata
  WeaveTruth truth;
};

GeneratedWeave generate_weave(const WeaveSpec& spec);

enum class InjectionKind { kFalsePositive, kFalseNegative, kJitter };

struct InjectionRecord {
  InjectionKind kind = InjectionKind::kFalsePositive;
  std::uint16_t yarn = 0;
  std::vector<int> frames;
};

struct ErrorSpec {
  int fp_count = 0;
  int fn_gap_count = 0;
  int fn_gap_length = 1;
  int jitter_px = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct InjectionResult {
  std::vector<LabelFrame> corrupted;
  std::vector<InjectionRecord> log;
  ClassMap class_map;  // input classes plus the injected FP ids
};

// FP: one-frame elliptical mask with a fresh unused ID on a background-only
// region of a random interior frame. FN: erases one yarn for
// fn_gap_length consecutive frames strictly inside its occurrence interval
// (yarns sampled without replacement). Jitter: whole-mask translation by at
// most jitter_px per axis. Every modification is logged.
InjectionResult inject_errors(const std::vector<LabelFrame>& ground_truth, const ClassMap& classes,
                              const ErrorSpec& err);

}  // namespace weaverec
