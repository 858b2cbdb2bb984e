#include "weaverec/tracker.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <unordered_map>

namespace weaverec {

double iou(const PixelSet& a, const PixelSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

PixelSet mask_pixels(const LabelFrame& frame, std::uint16_t label) {
  PixelSet pixels;
  for (int r = 0; r < frame.height; ++r)
    for (int c = 0; c < frame.width; ++c)
      if (frame.at(r, c) == label) pixels.push_back({r, c});
  return pixels;
}

std::vector<InstanceMask> masks_in_frame(const LabelFrame& frame, const ClassMap& class_map) {
  std::map<std::uint16_t, PixelSet> by_label;
  for (int r = 0; r < frame.height; ++r)
    for (int c = 0; c < frame.width; ++c) {
      const std::uint16_t label = frame.at(r, c);
      if (label != 0) by_label[label].push_back({r, c});
    }
  std::vector<InstanceMask> masks;
  masks.reserve(by_label.size());
  for (auto& [label, pixels] : by_label) {
    const auto it = class_map.find(label);
    if (it == class_map.end())
      throw data_error("label " + std::to_string(label) + " in frame " +
                       std::to_string(frame.frame_index) + " missing from class map");
    masks.push_back({frame.frame_index, label, it->second, std::move(pixels)});
  }
  return masks;
}

ClassMap TrackedStack::class_map() const {
  ClassMap out;
  for (const auto& [id, info] : yarn_index) out.emplace(id, info.cls);
  return out;
}

void TrackedStack::validate() const {
  std::map<std::uint16_t, std::vector<int>> presence;
  for (const auto& frame : frames) {
    frame.validate();
    for (std::uint16_t label : frame.labels)
      if (label != 0 && (presence[label].empty() || presence[label].back() != frame.frame_index))
        presence[label].push_back(frame.frame_index);
  }
  if (presence.size() != yarn_index.size())
    throw data_error("yarn index size does not match labels present in frames");
  for (const auto& [id, info] : yarn_index) {
    const auto it = presence.find(id);
    if (it == presence.end())
      throw data_error("yarn " + std::to_string(id) + " indexed but absent from frames");
    if (it->second != info.frames_present)
      throw data_error("frames_present mismatch for yarn " + std::to_string(id));
  }
}

TrackedStack TrackedStack::from_frames(std::vector<LabelFrame> frames, const ClassMap& class_map,
                                       double iou_threshold) {
  TrackedStack out;
  out.iou_threshold = iou_threshold;
  out.frames = std::move(frames);
  for (std::size_t k = 0; k < out.frames.size(); ++k) {
    out.frames[k].frame_index = static_cast<int>(k);
    for (const auto& [label, count] : instances_in_frame(out.frames[k])) {
      (void)count;
      auto it = out.yarn_index.find(label);
      if (it == out.yarn_index.end()) {
        const auto cls_it = class_map.find(label);
        if (cls_it == class_map.end())
          throw data_error("label " + std::to_string(label) + " missing from class map");
        it = out.yarn_index.emplace(label, YarnInfo{cls_it->second, {}}).first;
      }
      it->second.frames_present.push_back(static_cast<int>(k));
    }
  }
  return out;
}

namespace {

struct FrameInstances {
  std::vector<std::uint16_t> local_ids;                   // ascending
  std::unordered_map<std::uint16_t, std::size_t> index;   // local id -> slot
  std::vector<std::size_t> pixel_counts;
  std::vector<ClassLabel> classes;
};

FrameInstances collect_instances(const LabelFrame& frame, const ClassMap& class_map) {
  FrameInstances out;
  for (const auto& [label, count] : instances_in_frame(frame)) {
    const auto it = class_map.find(label);
    if (it == class_map.end())
      throw data_error("label " + std::to_string(label) + " in frame " +
                       std::to_string(frame.frame_index) + " missing from class map");
    out.index.emplace(label, out.local_ids.size());
    out.local_ids.push_back(label);
    out.pixel_counts.push_back(count);
    out.classes.push_back(it->second);
  }
  return out;
}

}  // namespace

TrackedStack track(const std::vector<LabelFrame>& stack, const ClassMap& class_map,
                   double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
    throw data_error("IoU threshold must lie in (0,1]");
  if (stack.empty()) throw data_error("cannot track an empty stack");
  for (std::size_t k = 0; k < stack.size(); ++k) {
    stack[k].validate();
    if (stack[k].width != stack[0].width || stack[k].height != stack[0].height)
      throw data_error("dimension mismatch at frame " + std::to_string(k));
  }

  TrackedStack out;
  out.iou_threshold = iou_threshold;
  out.frames.reserve(stack.size());

  std::uint32_t next_id = 1;
  auto fresh_id = [&next_id]() {
    if (next_id > std::numeric_limits<std::uint16_t>::max())
      throw data_error("yarn id space exhausted (more than 65535 yarns)");
    return static_cast<std::uint16_t>(next_id++);
  };

  FrameInstances prev;
  std::vector<std::uint16_t> prev_global;  // slot -> global yarn id

  for (std::size_t k = 0; k < stack.size(); ++k) {
    FrameInstances cur = collect_instances(stack[k], class_map);
    std::vector<std::uint16_t> cur_global(cur.local_ids.size(), 0);

    if (k > 0) {
      // Intersection counts between previous and current instances in one
      // pass over the pixel grid.
      std::unordered_map<std::uint32_t, std::size_t> inter;
      const auto& pf = stack[k - 1];
      const auto& cf = stack[k];
      for (std::size_t i = 0; i < pf.labels.size(); ++i) {
        const std::uint16_t a = pf.labels[i];
        const std::uint16_t b = cf.labels[i];
        if (a != 0 && b != 0)
          ++inter[(static_cast<std::uint32_t>(a) << 16) | b];
      }

      struct Proposal {
        std::size_t cur_slot;
        std::size_t prev_slot;
        double iou;
      };
      std::vector<Proposal> proposals;
      for (std::size_t j = 0; j < cur.local_ids.size(); ++j) {
        double best = 0.0;
        std::size_t best_prev = 0;
        bool found = false;
        for (std::size_t i = 0; i < prev.local_ids.size(); ++i) {
          if (prev.classes[i] != cur.classes[j]) continue;
          const auto it = inter.find((static_cast<std::uint32_t>(prev.local_ids[i]) << 16) |
                                     cur.local_ids[j]);
          if (it == inter.end()) continue;
          const double value = static_cast<double>(it->second) /
                               static_cast<double>(prev.pixel_counts[i] + cur.pixel_counts[j] -
                                                   it->second);
          // Ties among predecessors go to the lower local id (map order).
          if (value > best) {
            best = value;
            best_prev = i;
            found = true;
          }
        }
        if (found && best >= iou_threshold) proposals.push_back({j, best_prev, best});
      }

      // Injective per frame pair: higher IoU claims the predecessor yarn,
      // ties to the lower current local id; losers start fresh yarns.
      std::sort(proposals.begin(), proposals.end(), [&cur](const Proposal& a, const Proposal& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        return cur.local_ids[a.cur_slot] < cur.local_ids[b.cur_slot];
      });
      std::vector<bool> prev_taken(prev.local_ids.size(), false);
      for (const auto& p : proposals) {
        if (prev_taken[p.prev_slot]) continue;
        prev_taken[p.prev_slot] = true;
        cur_global[p.cur_slot] = prev_global[p.prev_slot];
      }
    }

    for (std::size_t j = 0; j < cur.local_ids.size(); ++j)
      if (cur_global[j] == 0) cur_global[j] = fresh_id();

    LabelFrame relabeled(stack[k].width, stack[k].height, static_cast<int>(k));
    for (std::size_t i = 0; i < stack[k].labels.size(); ++i) {
      const std::uint16_t local = stack[k].labels[i];
      if (local != 0) relabeled.labels[i] = cur_global[cur.index.at(local)];
    }
    out.frames.push_back(std::move(relabeled));

    for (std::size_t j = 0; j < cur.local_ids.size(); ++j) {
      auto it = out.yarn_index.find(cur_global[j]);
      if (it == out.yarn_index.end())
        it = out.yarn_index.emplace(cur_global[j], YarnInfo{cur.classes[j], {}}).first;
      it->second.frames_present.push_back(static_cast<int>(k));
    }

    prev = std::move(cur);
    prev_global = std::move(cur_global);
  }

  return out;
}

TrackedStack relabel_compact(const TrackedStack& tracked) {
  // First-appearance order, ties within one frame by ascending old id
  // (yarn_index iterates ids in ascending order already).
  std::vector<std::pair<int, std::uint16_t>> order;
  order.reserve(tracked.yarn_index.size());
  for (const auto& [id, info] : tracked.yarn_index) {
    if (info.frames_present.empty())
      throw data_error("yarn " + std::to_string(id) + " has no frames");
    order.push_back({info.frames_present.front(), id});
  }
  std::sort(order.begin(), order.end());

  std::unordered_map<std::uint16_t, std::uint16_t> remap;
  remap.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    remap.emplace(order[i].second, static_cast<std::uint16_t>(i + 1));

  TrackedStack out;
  out.iou_threshold = tracked.iou_threshold;
  out.frames = tracked.frames;
  for (auto& frame : out.frames)
    for (auto& label : frame.labels)
      if (label != 0) label = remap.at(label);
  for (const auto& [id, info] : tracked.yarn_index) out.yarn_index.emplace(remap.at(id), info);
  return out;
}

}  // namespace weaverec
