#include "weaverec/weave_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace weaverec {

namespace {

constexpr int kWeftMarginX = 4;
constexpr int kPlacementJitterZ = 2;
constexpr double kFpHalfAxisA = 5.0;
constexpr double kFpHalfAxisB = 3.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Independent substream per purpose: adding draws to one stream never
// perturbs another.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t purpose) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(purpose + 1)));
}

struct WeftTube {
  std::uint16_t yarn;
  double center_y;  // integer-valued
  int center_z;
  int z_lo, z_hi;  // inclusive rendered frame range
};

// Writes `label` at every candidate pixel that is still background; lower
// yarn IDs were rasterized earlier and win overlaps.
void paint_if_free(LabelFrame& frame, int row, int col, std::uint16_t label) {
  if (!frame.in_bounds(row, col)) return;
  auto& cell = frame.at(row, col);
  if (cell == 0) cell = label;
}

void rasterize_ellipse(LabelFrame& frame, double cx, double cy, double a, double b,
                       std::uint16_t label) {
  const int r0 = static_cast<int>(std::ceil(cy - b));
  const int r1 = static_cast<int>(std::floor(cy + b));
  const int c0 = static_cast<int>(std::ceil(cx - a));
  const int c1 = static_cast<int>(std::floor(cx + a));
  for (int row = r0; row <= r1; ++row) {
    const double dy = (row - cy) / b;
    for (int col = c0; col <= c1; ++col) {
      const double dx = (col - cx) / a;
      if (dx * dx + dy * dy <= 1.0) paint_if_free(frame, row, col, label);
    }
  }
}

// Realized 6-neighborhood adjacency of a label stack, scanned directly on
// the frames (the analysis module derives its contact map independently
// from the assembled volume).
std::set<std::pair<std::uint16_t, std::uint16_t>> scan_adjacency(
    const std::vector<LabelFrame>& frames) {
  std::set<std::pair<std::uint16_t, std::uint16_t>> pairs;
  auto add = [&pairs](std::uint16_t a, std::uint16_t b) {
    if (a != 0 && b != 0 && a != b) pairs.insert({std::min(a, b), std::max(a, b)});
  };
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const LabelFrame& f = frames[k];
    for (int row = 0; row < f.height; ++row) {
      for (int col = 0; col < f.width; ++col) {
        const std::uint16_t c = f.at(row, col);
        if (col + 1 < f.width) add(c, f.at(row, col + 1));
        if (row + 1 < f.height) add(c, f.at(row + 1, col));
        if (k + 1 < frames.size()) add(c, frames[k + 1].at(row, col));
      }
    }
  }
  return pairs;
}

}  // namespace

void WeaveSpec::validate() const {
  if (n_weft_layers < 1 || n_weft_per_layer < 1 || n_warp < 1)
    throw data_error("weave spec counts must be at least 1");
  if (half_axis_a < 1.0 || half_axis_b < 1.0)
    throw data_error("yarn half-axes must be at least 1 pixel");
  if (crimp_wavelength < 2.0) throw data_error("crimp wavelength must be at least 2 frames");
  if (crimp_amplitude < 0.0) throw data_error("crimp amplitude must be nonnegative");
  if (frame_width < 1 || frame_height < 1 || n_frames < 1)
    throw data_error("frame dimensions and count must be positive");
  if (pixel_size_um <= 0.0 || depth_step_um <= 0.0)
    throw data_error("physical sizes must be positive");
  if (yarn_count() > 65535) throw data_error("yarn count exceeds 16-bit label space");
}

double WarpCurve::y_at(int frame) const {
  return center_y + amplitude * std::sin(2.0 * std::numbers::pi * frame / wavelength + phase);
}

GeneratedWeave generate_weave(const WeaveSpec& spec) {
  spec.validate();

  const int layers = spec.n_weft_layers;
  const int per_layer = spec.n_weft_per_layer;
  const int warps = spec.n_warp;
  const double a = spec.half_axis_a;
  const double b = spec.half_axis_b;

  // Weft layers abut vertically so stacked tubes share faces at their
  // full-height frames.
  const int pitch_y = 2 * static_cast<int>(std::ceil(b)) + 1;
  const int y_base =
      static_cast<int>(std::lround(spec.frame_height / 2.0 - (layers - 1) * pitch_y / 2.0));
  auto layer_y = [&](int layer) { return static_cast<double>(y_base + layer * pitch_y); };

  // Rendered weft half-extent along z: stop one frame short of the ellipse
  // tip and keep the in-frame half-height at >= 0.5 px so every rendered
  // frame holds at least one row.
  const double dz_max = std::min(a - 1.0, b > 0.5 ? a * std::sqrt(1.0 - 0.25 / (b * b)) : 0.0);

  if (layer_y(0) - b < 0.0 || layer_y(layers - 1) + b > spec.frame_height - 1.0)
    throw data_error("geometry overflow: weft layers do not fit the frame height");
  if (spec.frame_width < 2 * kWeftMarginX + 1)
    throw data_error("geometry overflow: frame width below the weft band margin");
  const double z_pitch = static_cast<double>(spec.n_frames) / per_layer;
  if (z_pitch < 2.0 * dz_max + 2.0 * kPlacementJitterZ + 2.0)
    throw data_error("geometry overflow: weft tubes do not fit the frame count");
  const double x_pitch = static_cast<double>(spec.frame_width) / warps;
  if (x_pitch < 2.0 * a + 2.0)
    throw data_error("geometry overflow: warp sections do not fit the frame width");

  auto rng = substream(spec.seed, 0);  // placement
  std::uniform_real_distribution<double> z_jitter(-kPlacementJitterZ, kPlacementJitterZ);
  std::uniform_real_distribution<double> phase_jitter(-0.3, 0.3);

  // Warp yarns take the lowest IDs so overlap priority never erodes them:
  // their rasterized sections stay exact ellipses on the analytic curve.
  GeneratedWeave out;
  std::vector<WeftTube> tubes;
  std::vector<int> shared_z(per_layer);
  for (int j = 0; j < per_layer; ++j) {
    const double base = (j + 0.5) * z_pitch;
    int z = static_cast<int>(std::lround(base + z_jitter(rng)));
    const int lo = static_cast<int>(std::ceil(dz_max));
    const int hi = spec.n_frames - 1 - lo;
    shared_z[j] = std::clamp(z, lo, std::max(lo, hi));
  }
  std::uint16_t next_id = 1;
  for (int i = 0; i < warps; ++i) {
    WarpCurve curve;
    curve.yarn = next_id++;
    curve.center_x = (i + 0.5) * x_pitch;
    const int interface = layers > 1 ? i % (layers - 1) : 0;
    curve.center_y = layers > 1 ? layer_y(interface) + pitch_y / 2.0 : layer_y(0);
    curve.amplitude = spec.crimp_amplitude;
    curve.wavelength = spec.crimp_wavelength;
    curve.phase = std::numbers::pi * (i % 2) + phase_jitter(rng);
    if (curve.center_x - a < 0.0 || curve.center_x + a > spec.frame_width - 1.0 ||
        curve.center_y - curve.amplitude - b < 0.0 ||
        curve.center_y + curve.amplitude + b > spec.frame_height - 1.0)
      throw data_error("geometry overflow: warp yarn " + std::to_string(curve.yarn) +
                       " leaves the frame");
    out.truth.warp_curves.push_back(curve);
  }
  for (int layer = 0; layer < layers; ++layer) {
    for (int j = 0; j < per_layer; ++j) {
      WeftTube tube;
      tube.yarn = next_id++;
      tube.center_y = layer_y(layer);
      tube.center_z = shared_z[j];
      tube.z_lo = static_cast<int>(std::ceil(tube.center_z - dz_max));
      tube.z_hi = static_cast<int>(std::floor(tube.center_z + dz_max));
      if (tube.z_lo < 0 || tube.z_hi >= spec.n_frames || tube.z_lo > tube.z_hi)
        throw data_error("geometry overflow: weft tube " + std::to_string(tube.yarn) +
                         " leaves the frame range");
      tubes.push_back(tube);
    }
  }

  out.ground_truth.reserve(spec.n_frames);
  for (int z = 0; z < spec.n_frames; ++z) {
    LabelFrame frame(spec.frame_width, spec.frame_height, z);
    for (const WarpCurve& curve : out.truth.warp_curves)
      rasterize_ellipse(frame, curve.center_x, curve.y_at(z), a, b, curve.yarn);
    for (const WeftTube& tube : tubes) {
      if (z < tube.z_lo || z > tube.z_hi) continue;
      const double dz = (z - tube.center_z) / a;
      const double half_h = b * std::sqrt(std::max(0.0, 1.0 - dz * dz));
      const int r0 = static_cast<int>(std::ceil(tube.center_y - half_h));
      const int r1 = static_cast<int>(std::floor(tube.center_y + half_h));
      for (int row = r0; row <= r1; ++row)
        for (int col = kWeftMarginX; col < spec.frame_width - kWeftMarginX; ++col)
          paint_if_free(frame, row, col, tube.yarn);
    }
    out.ground_truth.push_back(std::move(frame));
  }

  // Every yarn must occupy exactly its nominal contiguous interval.
  std::map<std::uint16_t, std::vector<int>> presence;
  for (const LabelFrame& frame : out.ground_truth)
    for (const auto& [id, count] : instances_in_frame(frame)) {
      (void)count;
      presence[id].push_back(frame.frame_index);
    }
  for (const WarpCurve& curve : out.truth.warp_curves) {
    const auto it = presence.find(curve.yarn);
    if (it == presence.end() || static_cast<int>(it->second.size()) != spec.n_frames)
      throw data_error("geometry overflow: warp yarn " + std::to_string(curve.yarn) +
                       " lost frames during rasterization");
  }
  for (const WeftTube& tube : tubes) {
    const auto it = presence.find(tube.yarn);
    if (it == presence.end() ||
        static_cast<int>(it->second.size()) != tube.z_hi - tube.z_lo + 1 ||
        it->second.front() != tube.z_lo || it->second.back() != tube.z_hi)
      throw data_error("geometry overflow: weft tube " + std::to_string(tube.yarn) +
                       " is not contiguous after rasterization");
  }

  out.truth.adjacency = scan_adjacency(out.ground_truth);
  out.predictions = out.ground_truth;

  char name[32];
  for (int z = 0; z < spec.n_frames; ++z) {
    std::snprintf(name, sizeof(name), "pred/frame_%04d.png", z);
    out.manifest.frame_paths.emplace_back(name);
    std::snprintf(name, sizeof(name), "truth/frame_%04d.png", z);
    out.manifest.ground_truth_paths.emplace_back(name);
  }
  out.manifest.pixel_size_um = spec.pixel_size_um;
  out.manifest.depth_step_um = spec.depth_step_um;
  for (const WarpCurve& curve : out.truth.warp_curves)
    out.manifest.class_map.emplace(curve.yarn, ClassLabel::kWarp);
  for (const WeftTube& tube : tubes) out.manifest.class_map.emplace(tube.yarn, ClassLabel::kWeft);
  out.manifest.validate();
  return out;
}

void ErrorSpec::validate() const {
  if (fp_count < 0 || fn_gap_count < 0) throw data_error("error counts must be nonnegative");
  if (fn_gap_length < 1) throw data_error("FN gap length must be at least 1");
  if (jitter_px < 0) throw data_error("jitter must be nonnegative");
}

InjectionResult inject_errors(const std::vector<LabelFrame>& ground_truth, const ClassMap& classes,
                              const ErrorSpec& err) {
  err.validate();
  if (ground_truth.empty()) throw data_error("cannot inject errors into an empty stack");
  for (const LabelFrame& f : ground_truth) f.validate();

  const int n_frames = static_cast<int>(ground_truth.size());
  InjectionResult out;
  out.corrupted = ground_truth;
  out.class_map = classes;

  std::map<std::uint16_t, std::pair<int, int>> span;  // yarn -> [first, last]
  std::uint16_t max_id = 0;
  for (const LabelFrame& frame : ground_truth) {
    for (const auto& [id, count] : instances_in_frame(frame)) {
      (void)count;
      auto it = span.find(id);
      if (it == span.end())
        span.emplace(id, std::pair<int, int>{frame.frame_index, frame.frame_index});
      else
        it->second.second = frame.frame_index;
      max_id = std::max(max_id, id);
    }
  }

  // Jitter: per (yarn, frame) whole-mask translation, lower IDs keep
  // contended cells. Applied first so FN erasure and FP placement see the
  // displaced geometry.
  if (err.jitter_px > 0) {
    auto rng = substream(err.seed, 2);
    std::uniform_int_distribution<int> shift(-err.jitter_px, err.jitter_px);
    std::map<std::uint16_t, std::vector<int>> jittered_frames;
    for (std::size_t k = 0; k < out.corrupted.size(); ++k) {
      const LabelFrame& src = out.corrupted[k];
      LabelFrame dst(src.width, src.height, src.frame_index);
      const auto counts = instances_in_frame(src);
      for (const auto& [id, count] : counts) {
        (void)count;
        const int dx = shift(rng);
        const int dy = shift(rng);
        for (int row = 0; row < src.height; ++row)
          for (int col = 0; col < src.width; ++col)
            if (src.at(row, col) == id) paint_if_free(dst, row + dy, col + dx, id);
        if (dx != 0 || dy != 0) jittered_frames[id].push_back(static_cast<int>(k));
      }
      out.corrupted[k] = std::move(dst);
    }
    for (const auto& [id, frames] : jittered_frames)
      out.log.push_back({InjectionKind::kJitter, id, frames});
  }

  // FN gaps: one yarn each (sampled without replacement), erased strictly
  // inside its occurrence interval so both boundary occurrences survive.
  if (err.fn_gap_count > 0) {
    auto rng = substream(err.seed, 1);
    std::vector<std::uint16_t> eligible;
    for (const auto& [id, fl] : span)
      if (fl.second - fl.first >= err.fn_gap_length + 1) eligible.push_back(id);
    if (static_cast<int>(eligible.size()) < err.fn_gap_count)
      throw data_error("infeasible injection: only " + std::to_string(eligible.size()) +
                       " yarns have interiors long enough for a gap of " +
                       std::to_string(err.fn_gap_length) + " frames");
    for (int g = 0; g < err.fn_gap_count; ++g) {
      std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
      const std::size_t slot = pick(rng);
      const std::uint16_t yarn = eligible[slot];
      eligible.erase(eligible.begin() + slot);
      const auto [first, last] = span.at(yarn);
      std::uniform_int_distribution<int> start(first + 1, last - err.fn_gap_length);
      const int s = start(rng);
      InjectionRecord record{InjectionKind::kFalseNegative, yarn, {}};
      for (int f = s; f < s + err.fn_gap_length; ++f) {
        for (auto& label : out.corrupted[f].labels)
          if (label == yarn) label = 0;
        record.frames.push_back(f);
      }
      out.log.push_back(std::move(record));
    }
  }

  // FPs: one-frame ellipses with fresh IDs on background-only regions of
  // interior frames, so removal restores the stack exactly.
  if (err.fp_count > 0) {
    if (n_frames < 3)
      throw data_error("infeasible injection: no interior frame available for FPs");
    const int width = ground_truth.front().width;
    const int height = ground_truth.front().height;
    const int ca = static_cast<int>(kFpHalfAxisA);
    const int cb = static_cast<int>(kFpHalfAxisB);
    if (width < 2 * ca + 1 || height < 2 * cb + 1)
      throw data_error("infeasible injection: frame too small for an FP ellipse");
    auto rng = substream(err.seed, 0);
    std::uniform_int_distribution<int> pick_frame(1, n_frames - 2);
    std::uniform_int_distribution<int> pick_col(ca, width - 1 - ca);
    std::uniform_int_distribution<int> pick_row(cb, height - 1 - cb);
    for (int i = 0; i < err.fp_count; ++i) {
      const long fresh = static_cast<long>(max_id) + 1 + i;
      if (fresh > 65535) throw data_error("infeasible injection: label space exhausted");
      const auto id = static_cast<std::uint16_t>(fresh);
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        const int f = pick_frame(rng);
        const int cx = pick_col(rng);
        const int cy = pick_row(rng);
        LabelFrame& frame = out.corrupted[f];

        std::vector<std::size_t> cells;
        bool clear = true;
        for (int row = cy - cb; row <= cy + cb && clear; ++row) {
          const double dy = (row - cy) / kFpHalfAxisB;
          for (int col = cx - ca; col <= cx + ca; ++col) {
            const double dx = (col - cx) / kFpHalfAxisA;
            if (dx * dx + dy * dy > 1.0) continue;
            const auto cell = static_cast<std::size_t>(row) * frame.width + col;
            if (frame.labels[cell] != 0) {
              clear = false;
              break;
            }
            cells.push_back(cell);
          }
        }
        if (!clear) continue;
        for (std::size_t cell : cells) frame.labels[cell] = id;
        out.log.push_back({InjectionKind::kFalsePositive, id, {f}});
        out.class_map.emplace(id, ClassLabel::kWeft);
        placed = true;
      }
      if (!placed)
        throw data_error("infeasible injection: no background region found for FP " +
                         std::to_string(id));
    }
  }

  return out;
}

}  // namespace weaverec
