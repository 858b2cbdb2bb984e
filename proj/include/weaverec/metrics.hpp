#pragma once

#include <cstdint>
#include <vector>

#include "weaverec/dataset_io.hpp"

namespace weaverec {

struct Match {
  std::uint16_t pred_id = 0;
  std::uint16_t truth_id = 0;
  double iou = 0.0;
};

struct FrameMatches {
  std::vector<Match> matches;                 // ascending pred_id
  std::vector<std::uint16_t> fp_ids;          // unmatched predictions
  std::vector<std::uint16_t> fn_ids;          // unmatched ground truths
};

// Scores on the 0-100 scale; pq = sq * rq / 100 to 1e-9 by construction.
struct FrameScore {
  int frame_index = 0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double tp_iou_sum = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  double pq = 0.0;
};

struct PQReport {
  std::vector<FrameScore> per_frame;
  double pq_avg = 0.0;
  double sq_avg = 0.0;
  double rq_avg = 0.0;
};

// Same-class pairs with IoU strictly above 0.5 are TPs; the strict-majority
// rule makes the match unique on both sides, so no assignment problem
// arises. Unmatched predictions are FPs, unmatched truths FNs.
FrameMatches match_frame(const LabelFrame& pred, const LabelFrame& truth,
                         const ClassMap& pred_classes, const ClassMap& truth_classes);

// SQ = 100 * mean TP IoU (0 when tp = 0); RQ = 100 * tp / (tp + fp/2 + fn);
// an empty frame against an empty truth scores 100/100/100.
FrameScore score_frame(const FrameMatches& matches, int frame_index);

PQReport score_stack(const std::vector<LabelFrame>& pred, const std::vector<LabelFrame>& truth,
                     const ClassMap& pred_classes, const ClassMap& truth_classes,
                     int threads = 1);

}  // namespace weaverec
