#include "weaverec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "weaverec/parallel.hpp"

namespace weaverec {

namespace {

ClassLabel class_of(const ClassMap& classes, std::uint16_t id, const char* side, int frame) {
  const auto it = classes.find(id);
  if (it == classes.end())
    throw data_error(std::string(side) + " label " + std::to_string(id) + " in frame " +
                     std::to_string(frame) + " missing from class map");
  return it->second;
}

}  // namespace

FrameMatches match_frame(const LabelFrame& pred, const LabelFrame& truth,
                         const ClassMap& pred_classes, const ClassMap& truth_classes) {
  if (pred.width != truth.width || pred.height != truth.height)
    throw data_error("prediction/ground-truth dimension mismatch at frame " +
                     std::to_string(pred.frame_index));

  const auto pred_counts = instances_in_frame(pred);
  const auto truth_counts = instances_in_frame(truth);

  std::unordered_map<std::uint32_t, std::size_t> inter;
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    const std::uint16_t p = pred.labels[i];
    const std::uint16_t g = truth.labels[i];
    if (p != 0 && g != 0) ++inter[(static_cast<std::uint32_t>(p) << 16) | g];
  }

  FrameMatches out;
  std::map<std::uint16_t, bool> pred_matched, truth_matched;
  for (const auto& [id, n] : pred_counts) {
    (void)n;
    pred_matched[id] = false;
  }
  for (const auto& [id, n] : truth_counts) {
    (void)n;
    truth_matched[id] = false;
  }

  // IoU > 0.5 admits at most one partner per instance on each side, so a
  // plain scan over overlapping same-class pairs is a complete matcher.
  for (const auto& [key, overlap] : inter) {
    const auto p = static_cast<std::uint16_t>(key >> 16);
    const auto g = static_cast<std::uint16_t>(key & 0xffff);
    if (class_of(pred_classes, p, "prediction", pred.frame_index) !=
        class_of(truth_classes, g, "ground-truth", truth.frame_index))
      continue;
    const std::size_t uni = pred_counts.at(p) + truth_counts.at(g) - overlap;
    const double value = static_cast<double>(overlap) / static_cast<double>(uni);
    if (value > 0.5) {
      out.matches.push_back({p, g, value});
      pred_matched[p] = true;
      truth_matched[g] = true;
    }
  }
  std::sort(out.matches.begin(), out.matches.end(),
            [](const Match& a, const Match& b) { return a.pred_id < b.pred_id; });

  for (const auto& [id, matched] : pred_matched)
    if (!matched) out.fp_ids.push_back(id);
  for (const auto& [id, matched] : truth_matched)
    if (!matched) out.fn_ids.push_back(id);
  return out;
}

FrameScore score_frame(const FrameMatches& matches, int frame_index) {
  FrameScore s;
  s.frame_index = frame_index;
  s.tp = static_cast<int>(matches.matches.size());
  s.fp = static_cast<int>(matches.fp_ids.size());
  s.fn = static_cast<int>(matches.fn_ids.size());
  for (const Match& m : matches.matches) s.tp_iou_sum += m.iou;

  if (s.tp + s.fp + s.fn == 0) {
    // Empty frame against empty truth: a vacuously perfect reconstruction.
    s.sq = s.rq = s.pq = 100.0;
    return s;
  }
  s.sq = s.tp > 0 ? 100.0 * s.tp_iou_sum / s.tp : 0.0;
  s.rq = 100.0 * s.tp / (s.tp + 0.5 * s.fp + s.fn);
  s.pq = s.sq * s.rq / 100.0;
  return s;
}

PQReport score_stack(const std::vector<LabelFrame>& pred, const std::vector<LabelFrame>& truth,
                     const ClassMap& pred_classes, const ClassMap& truth_classes, int threads) {
  if (pred.size() != truth.size())
    throw data_error("stack length mismatch: " + std::to_string(pred.size()) + " vs " +
                     std::to_string(truth.size()));
  if (pred.empty()) throw data_error("cannot score an empty stack");

  PQReport report;
  report.per_frame.resize(pred.size());
  parallel_for(pred.size(), threads, [&](std::size_t i) {
    const FrameMatches matches = match_frame(pred[i], truth[i], pred_classes, truth_classes);
    report.per_frame[i] = score_frame(matches, static_cast<int>(i));
  });

  for (const FrameScore& s : report.per_frame) {
    report.pq_avg += s.pq;
    report.sq_avg += s.sq;
    report.rq_avg += s.rq;
  }
  const double n = static_cast<double>(report.per_frame.size());
  report.pq_avg /= n;
  report.sq_avg /= n;
  report.rq_avg /= n;
  return report;
}

}  // namespace weaverec
