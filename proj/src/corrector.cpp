#include "weaverec/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

namespace weaverec {

namespace {

constexpr double kInf = 1e20;

// 1D squared distance transform (Felzenszwalb & Huttenlocher).
void edt_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z, int n) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

// Exact 2D squared EDT of `grid` (0 at feature pixels, kInf elsewhere).
void edt_2d(std::vector<double>& grid, int width, int height) {
  const int n = std::max(width, height);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);

  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) f[y] = grid[static_cast<std::size_t>(y) * width + x];
    edt_1d(f, d, v, z, height);
    for (int y = 0; y < height; ++y) grid[static_cast<std::size_t>(y) * width + x] = d[y];
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) f[x] = grid[static_cast<std::size_t>(y) * width + x];
    edt_1d(f, d, v, z, width);
    for (int x = 0; x < width; ++x) grid[static_cast<std::size_t>(y) * width + x] = d[x];
  }
}

struct Window {
  int row0 = 0;
  int col0 = 0;
  int width = 0;
  int height = 0;

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row - row0) * width + (col - col0);
  }
};

Window union_window(const PixelSet& a, const PixelSet& b) {
  int rmin = std::numeric_limits<int>::max(), rmax = std::numeric_limits<int>::min();
  int cmin = rmin, cmax = rmax;
  for (const auto* set : {&a, &b}) {
    for (const Pixel& p : *set) {
      rmin = std::min(rmin, p.row);
      rmax = std::max(rmax, p.row);
      cmin = std::min(cmin, p.col);
      cmax = std::max(cmax, p.col);
    }
  }
  // One pixel of margin keeps the in/out distance fields exact inside.
  Window w;
  w.row0 = rmin - 1;
  w.col0 = cmin - 1;
  w.width = cmax - cmin + 3;
  w.height = rmax - rmin + 3;
  return w;
}

// Signed Euclidean distance over the window, negative inside the mask.
std::vector<double> signed_field(const PixelSet& mask, const Window& w) {
  const std::size_t n = static_cast<std::size_t>(w.width) * w.height;
  std::vector<double> outside(n, kInf), inside(n, 0.0);
  for (const Pixel& p : mask) {
    outside[w.index(p.row, p.col)] = 0.0;
    inside[w.index(p.row, p.col)] = kInf;
  }
  edt_2d(outside, w.width, w.height);
  edt_2d(inside, w.width, w.height);
  std::vector<double> sdf(n);
  for (std::size_t i = 0; i < n; ++i) sdf[i] = std::sqrt(outside[i]) - std::sqrt(inside[i]);
  return sdf;
}

}  // namespace

PixelSet interpolate_gap(const PixelSet& mask_before, const PixelSet& mask_after, double t) {
  if (mask_before.empty() || mask_after.empty())
    throw data_error("interpolate_gap requires nonempty masks");
  if (!(t >= 0.0 && t <= 1.0)) throw data_error("interpolation fraction outside [0,1]");

  const Window w = union_window(mask_before, mask_after);
  const std::vector<double> before = signed_field(mask_before, w);
  const std::vector<double> after = signed_field(mask_after, w);

  PixelSet result;
  double best = kInf;
  PixelSet argmin;
  for (int row = w.row0; row < w.row0 + w.height; ++row) {
    for (int col = w.col0; col < w.col0 + w.width; ++col) {
      const std::size_t i = w.index(row, col);
      const double blend = (1.0 - t) * before[i] + t * after[i];
      if (blend <= 0.0) result.push_back({row, col});
      if (blend < best) {
        best = blend;
        argmin.clear();
        argmin.push_back({row, col});
      } else if (blend == best) {
        argmin.push_back({row, col});
      }
    }
  }
  // Distant disjoint masks can blend to an empty level set; fall back to the
  // field minimum so the result is never empty.
  if (result.empty()) result = std::move(argmin);
  return result;
}

std::vector<CorrectionFlag> scan_blocks(const TrackedStack& tracked, int block_size) {
  if (block_size < 3) throw data_error("block size must be at least 3");
  const int n_frames = static_cast<int>(tracked.frames.size());
  if (n_frames < block_size)
    throw data_error("block size " + std::to_string(block_size) + " exceeds dataset length " +
                     std::to_string(n_frames));

  std::set<std::pair<int, std::uint16_t>> fp_candidates;
  std::set<std::pair<int, std::uint16_t>> fn_flags;

  for (const auto& [yarn, info] : tracked.yarn_index) {
    const auto& occ = info.frames_present;
    std::vector<char> present(n_frames, 0);
    for (int f : occ) present[f] = 1;

    std::size_t lo = 0, hi = 0;  // occ window [lo, hi)
    for (int k = 0; k + block_size <= n_frames; ++k) {
      const int last = k + block_size - 1;
      while (lo < occ.size() && occ[lo] < k) ++lo;
      if (hi < lo) hi = lo;
      while (hi < occ.size() && occ[hi] <= last) ++hi;
      const std::size_t count = hi - lo;
      if (count == 0) continue;
      if (count == 1) {
        const int f = occ[lo];
        if (f > k && f < last) fp_candidates.insert({f, yarn});
      } else {
        for (int m = occ[lo] + 1; m < occ[hi - 1]; ++m)
          if (!present[m]) fn_flags.insert({m, yarn});
      }
    }
  }

  std::vector<CorrectionFlag> flags;
  for (const auto& [frame, yarn] : fp_candidates) {
    // Presence in any other frame of the stack proves the yarn is real.
    if (tracked.yarn_index.at(yarn).frames_present.size() == 1)
      flags.push_back({yarn, frame, FlagKind::kFalsePositive});
  }
  for (const auto& [frame, yarn] : fn_flags)
    flags.push_back({yarn, frame, FlagKind::kFalseNegative});
  std::sort(flags.begin(), flags.end(), [](const CorrectionFlag& a, const CorrectionFlag& b) {
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.yarn < b.yarn;
  });
  return flags;
}

std::pair<TrackedStack, CorrectionLog> remove_false_positives(
    const TrackedStack& tracked, const std::vector<CorrectionFlag>& flags) {
  TrackedStack out = tracked;
  CorrectionLog log;
  for (const auto& flag : flags) {
    if (flag.kind != FlagKind::kFalsePositive) continue;
    LabelFrame& frame = out.frames[flag.frame];
    std::size_t removed = 0;
    for (auto& label : frame.labels) {
      if (label == flag.yarn) {
        label = 0;
        ++removed;
      }
    }
    if (removed == 0) continue;
    log.removals.push_back({flag.yarn, flag.frame, removed});
    auto it = out.yarn_index.find(flag.yarn);
    auto& frames_present = it->second.frames_present;
    frames_present.erase(std::remove(frames_present.begin(), frames_present.end(), flag.frame),
                         frames_present.end());
    if (frames_present.empty()) out.yarn_index.erase(it);
  }
  return {std::move(out), std::move(log)};
}

std::pair<TrackedStack, CorrectionLog> fill_false_negatives(
    const TrackedStack& tracked, const std::vector<CorrectionFlag>& flags) {
  TrackedStack out = tracked;
  CorrectionLog log;

  for (const auto& flag : flags) {
    if (flag.kind != FlagKind::kFalseNegative) continue;
    const auto it = tracked.yarn_index.find(flag.yarn);
    if (it == tracked.yarn_index.end())
      throw data_error("FN flag for unknown yarn " + std::to_string(flag.yarn));
    const auto& occ = it->second.frames_present;
    const auto next_it = std::upper_bound(occ.begin(), occ.end(), flag.frame);
    if (next_it == occ.begin() || next_it == occ.end())
      throw data_error("FN flag for yarn " + std::to_string(flag.yarn) + " at frame " +
                       std::to_string(flag.frame) + " lacks bounding occurrences");
    const int prev = *std::prev(next_it);
    const int next = *next_it;

    // Bounding masks come from the pre-fill stack so interpolation is always
    // anchored on real occurrences.
    const PixelSet before = mask_pixels(tracked.frames[prev], flag.yarn);
    const PixelSet after = mask_pixels(tracked.frames[next], flag.yarn);
    const double t = static_cast<double>(flag.frame - prev) / (next - prev);
    const PixelSet phi = interpolate_gap(before, after, t);

    LabelFrame& frame = out.frames[flag.frame];
    std::size_t written = 0;
    for (const Pixel& p : phi) {
      if (!frame.in_bounds(p.row, p.col)) continue;
      auto& cell = frame.at(p.row, p.col);
      if (cell == 0) {  // existing yarn pixels always win
        cell = flag.yarn;
        ++written;
      }
    }
    if (written == 0) continue;
    log.fills.push_back({flag.yarn, flag.frame, written});
    auto& frames_present = out.yarn_index.at(flag.yarn).frames_present;
    frames_present.insert(std::lower_bound(frames_present.begin(), frames_present.end(), flag.frame),
                          flag.frame);
  }
  return {std::move(out), std::move(log)};
}

std::pair<TrackedStack, CorrectionLog> correct(const TrackedStack& tracked, int block_size) {
  const auto fp_flags = scan_blocks(tracked, block_size);
  auto [removed, removal_log] = remove_false_positives(tracked, fp_flags);
  const auto fn_flags = scan_blocks(removed, block_size);
  auto [filled, fill_log] = fill_false_negatives(removed, fn_flags);
  CorrectionLog log;
  log.removals = std::move(removal_log.removals);
  log.fills = std::move(fill_log.fills);
  return {std::move(filled), std::move(log)};
}

}  // namespace weaverec
