#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <vector>

#include "weaverec/dataset_io.hpp"

namespace weaverec {

struct Pixel {
  int row = 0;
  int col = 0;
  auto operator<=>(const Pixel&) const = default;
};

// Kept sorted in (row, col) order; extraction from frames yields this
// naturally and set algebra relies on it.
using PixelSet = std::vector<Pixel>;

// |a ∩ b| / |a ∪ b|; 0 when both sets are empty.
double iou(const PixelSet& a, const PixelSet& b);

struct InstanceMask {
  int frame_index = 0;
  std::uint16_t local_id = 0;
  ClassLabel cls = ClassLabel::kWeft;
  PixelSet pixels;
};

// All instances of one frame, pixels in raster order, ascending local id.
std::vector<InstanceMask> masks_in_frame(const LabelFrame& frame, const ClassMap& class_map);

// Pixel set of one label in one frame (raster order).
PixelSet mask_pixels(const LabelFrame& frame, std::uint16_t label);

struct YarnInfo {
  ClassLabel cls = ClassLabel::kWeft;
  std::vector<int> frames_present;  // sorted, exactly the frames with >= 1 pixel
};

// Frame stack whose labels are globally consistent yarn IDs.
struct TrackedStack {
  std::vector<LabelFrame> frames;
  std::map<std::uint16_t, YarnInfo> yarn_index;
  double iou_threshold = 0.0;

  ClassMap class_map() const;
  void validate() const;

  // Treats the labels as already-global yarn IDs (e.g. a generator's ground
  // truth or a stack reloaded from disk) and rebuilds the index.
  static TrackedStack from_frames(std::vector<LabelFrame> frames, const ClassMap& class_map,
                                  double iou_threshold = 0.0);
};

// Frame-to-frame IoU tracking: frame-0 instances start fresh yarns; each
// later instance joins the same-class previous-frame yarn of maximum IoU
// when that IoU >= threshold, with injective per-frame-pair assignment
// (higher IoU wins, ties to the lower local id; losers start fresh yarns).
TrackedStack track(const std::vector<LabelFrame>& stack, const ClassMap& class_map,
                   double iou_threshold);

// Renumbers yarn IDs 1..Y in first-appearance order (ties within one frame
// by ascending old ID). Idempotent.
TrackedStack relabel_compact(const TrackedStack& tracked);

}  // namespace weaverec
