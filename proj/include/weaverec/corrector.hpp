#pragma once

#include <cstdint>
#include <vector>

#include "weaverec/tracker.hpp"

namespace weaverec {

enum class FlagKind { kFalsePositive, kFalseNegative };

struct CorrectionFlag {
  std::uint16_t yarn = 0;
  int frame = 0;
  FlagKind kind = FlagKind::kFalsePositive;
  auto operator<=>(const CorrectionFlag&) const = default;
};

struct Removal {
  std::uint16_t yarn = 0;
  int frame = 0;
  std::size_t pixels = 0;
};

struct Fill {
  std::uint16_t yarn = 0;
  int frame = 0;
  std::size_t pixels = 0;  // pixels actually written (hierarchy may block some)
};

struct CorrectionLog {
  std::vector<Removal> removals;
  std::vector<Fill> fills;
};

// Regional-block sweep, stride 1, anchors 0..|F|-|block_size|. A yarn seen
// exactly once in a block at a strictly interior frame is an FP candidate;
// presence in any other frame of the stack rescues it. Absent frames lying
// strictly between two in-block occurrences are FN flags. Flags are
// de-duplicated and sorted by (frame, yarn).
std::vector<CorrectionFlag> scan_blocks(const TrackedStack& tracked, int block_size);

// Zeroes the masks of FP-flagged (yarn, frame) pairs; yarns left with no
// frames are dropped from the index.
std::pair<TrackedStack, CorrectionLog> remove_false_positives(const TrackedStack& tracked,
                                                              const std::vector<CorrectionFlag>& flags);

// Linear shape interpolation via signed Euclidean distance fields (negative
// inside): returns { p : (1-t)*d_before(p) + t*d_after(p) <= 0 }. When that
// level set is empty (possible only for distant disjoint masks) the pixels
// minimizing the blended field are returned so the result is never empty.
PixelSet interpolate_gap(const PixelSet& mask_before, const PixelSet& mask_after, double t);

// Fills FN-flagged frames with the interpolated mask of the bounding real
// occurrences; existing yarn pixels always win over interpolated ones.
std::pair<TrackedStack, CorrectionLog> fill_false_negatives(const TrackedStack& tracked,
                                                            const std::vector<CorrectionFlag>& flags);

// scan -> remove FPs -> re-scan -> fill FNs. Removal first so spurious
// yarns never anchor an interpolation.
std::pair<TrackedStack, CorrectionLog> correct(const TrackedStack& tracked, int block_size);

}  // namespace weaverec
