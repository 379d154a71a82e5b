#include "sfa/cuboid.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "sfa/error.hpp"
#include "sfa/rng.hpp"

namespace sfa {

void FrameSequence::validate() const {
  if (frames == 0 || height == 0 || width == 0) throw Error(ErrorCode::InvalidInput, "empty sequence");
  if (pixels.size() != frames * height * width)
    throw Error(ErrorCode::InvalidInput, "pixel count does not match T×H×W");
  if (!boxes.empty() && boxes.size() != frames)
    throw Error(ErrorCode::InvalidInput, "bounding boxes must be absent or given per frame");
  for (std::size_t t = 0; t < boxes.size(); ++t) {
    if (!boxes[t]) continue;
    const auto& b = *boxes[t];
    if (b.x < 0 || b.y < 0 || b.w <= 0 || b.h <= 0 || static_cast<std::size_t>(b.x + b.w) > width ||
        static_cast<std::size_t>(b.y + b.h) > height)
      throw Error(ErrorCode::InvalidInput, "bounding box of frame " + std::to_string(t) + " leaves the frame");
  }
}

std::size_t MotionMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

FrameSequence normalize_sequence(const FrameSequence& seq) {
  const std::size_t n = seq.pixels.size();
  if (n < 2) throw Error(ErrorCode::DegenerateSequence, "need at least two pixels");
  double mean = 0.0;
  for (double v : seq.pixels) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : seq.pixels) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  if (!(var > 0.0)) throw Error(ErrorCode::DegenerateSequence, "sequence has zero variance");
  const double inv_sd = 1.0 / std::sqrt(var);
  FrameSequence out = seq;
  for (double& v : out.pixels) v = (v - mean) * inv_sd;
  return out;
}

FrameSequence frame_difference(const FrameSequence& seq) {
  if (seq.frames < 2) throw Error(ErrorCode::TooShort, "frame difference needs two frames");
  FrameSequence out(seq.frames - 1, seq.height, seq.width);
  const std::size_t fs = seq.frame_size();
  for (std::size_t t = 0; t + 1 < seq.frames; ++t)
    for (std::size_t i = 0; i < fs; ++i) out.pixels[t * fs + i] = seq.pixels[(t + 1) * fs + i] - seq.pixels[t * fs + i];
  if (!seq.boxes.empty()) out.boxes.assign(seq.boxes.begin(), seq.boxes.end() - 1);
  return out;
}

std::vector<double> sobel_magnitude(const Frame& f) {
  std::vector<double> mag(f.height * f.width, 0.0);
  if (f.height < 3 || f.width < 3) return mag;
  for (std::size_t y = 1; y + 1 < f.height; ++y)
    for (std::size_t x = 1; x + 1 < f.width; ++x) {
      const double gx = (f.at(y - 1, x + 1) + 2.0 * f.at(y, x + 1) + f.at(y + 1, x + 1)) -
                        (f.at(y - 1, x - 1) + 2.0 * f.at(y, x - 1) + f.at(y + 1, x - 1));
      const double gy = (f.at(y + 1, x - 1) + 2.0 * f.at(y + 1, x) + f.at(y + 1, x + 1)) -
                        (f.at(y - 1, x - 1) + 2.0 * f.at(y - 1, x) + f.at(y - 1, x + 1));
      mag[y * f.width + x] = std::sqrt(gx * gx + gy * gy);
    }
  return mag;
}

MotionMask motion_boundary(const Frame& diff, double delta, std::optional<BoundingBox> box) {
  if (!(delta >= 0.0)) throw Error(ErrorCode::InvalidInput, "motion threshold must be nonnegative");
  MotionMask m{diff.height, diff.width, delta, std::vector<std::uint8_t>(diff.height * diff.width, 0)};
  const std::vector<double> mag = sobel_magnitude(diff);
  for (std::size_t y = 0; y < diff.height; ++y)
    for (std::size_t x = 0; x < diff.width; ++x) {
      if (box && !box->contains(static_cast<std::int64_t>(x), static_cast<std::int64_t>(y))) continue;
      if (mag[y * diff.width + x] > delta) m.mask[y * diff.width + x] = 1;
    }
  return m;
}

double default_delta(const FrameSequence& diffs, double scale, double percentile) {
  std::vector<double> all;
  if (diffs.height < 3 || diffs.width < 3) return 0.0;
  all.reserve(diffs.frames * (diffs.height - 2) * (diffs.width - 2));
  for (std::size_t t = 0; t < diffs.frames; ++t) {
    const auto mag = sobel_magnitude(diffs.frame(t));
    for (std::size_t y = 1; y + 1 < diffs.height; ++y)
      for (std::size_t x = 1; x + 1 < diffs.width; ++x) all.push_back(mag[y * diffs.width + x]);
  }
  if (all.empty()) return 0.0;
  // nearest-rank percentile
  auto rank = static_cast<std::size_t>(std::ceil(percentile * static_cast<double>(all.size())));
  rank = std::clamp<std::size_t>(rank, 1, all.size()) - 1;
  std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(rank), all.end());
  return scale * all[rank];
}

bool cuboid_fits(const FrameSequence& seq, const CuboidGeometry& size, std::size_t x, std::size_t y,
                 std::size_t t) noexcept {
  const std::size_t half_w = size.w / 2;
  const std::size_t half_h = size.h / 2;
  return x >= half_w && y >= half_h && x - half_w + size.w <= seq.width && y - half_h + size.h <= seq.height &&
         t + size.d <= seq.frames;
}

Cuboid extract_cuboid(const FrameSequence& seq, const CuboidGeometry& size, std::size_t x, std::size_t y,
                      std::size_t t) {
  if (!cuboid_fits(seq, size, x, y, t))
    throw Error(ErrorCode::InvalidInput, "cuboid at (" + std::to_string(x) + ", " + std::to_string(y) + ", " +
                                             std::to_string(t) + ") does not fit");
  Cuboid c;
  c.x = x;
  c.y = y;
  c.t = t;
  c.size = size;
  c.data.reserve(size.h * size.w * size.d);
  const std::size_t left = x - size.w / 2;
  const std::size_t top = y - size.h / 2;
  for (std::size_t f = 0; f < size.d; ++f)
    for (std::size_t r = 0; r < size.h; ++r)
      for (std::size_t col = 0; col < size.w; ++col) c.data.push_back(seq.at(t + f, top + r, left + col));
  return c;
}

namespace {

struct Pos {
  std::size_t t, y, x;
  friend bool operator<(const Pos& a, const Pos& b) { return std::tie(a.t, a.y, a.x) < std::tie(b.t, b.y, b.x); }
};

void check_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorCode::InvalidInput, "fraction must lie in (0, 1]");
}

// Appends ⌈fraction·n⌉ of the n fitting masked pixels, in (y, x) order.
void sample_start(const FrameSequence& seq, const MotionMask& m, std::size_t t, double fraction,
                  const CuboidGeometry& size, std::mt19937_64& rng, std::vector<Pos>& chosen) {
  if (m.height != seq.height || m.width != seq.width)
    throw Error(ErrorCode::InvalidDimension, "mask dimensions differ from the sequence");
  std::vector<Pos> candidates;
  for (std::size_t y = 0; y < m.height; ++y)
    for (std::size_t x = 0; x < m.width; ++x)
      if (m.at(y, x) && cuboid_fits(seq, size, x, y, t)) candidates.push_back({t, y, x});
  const auto take = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(candidates.size())));
  partial_shuffle(candidates, take, rng);
  candidates.resize(take);
  std::sort(candidates.begin(), candidates.end());
  chosen.insert(chosen.end(), candidates.begin(), candidates.end());
}

std::vector<Cuboid> finish(const FrameSequence& seq, const CuboidGeometry& size, std::vector<Pos> chosen,
                           std::optional<std::size_t> max_count, std::mt19937_64& rng) {
  if (max_count && chosen.size() > *max_count) {
    partial_shuffle(chosen, *max_count, rng);
    chosen.resize(*max_count);
    std::sort(chosen.begin(), chosen.end());
  }
  std::vector<Cuboid> out;
  out.reserve(chosen.size());
  for (const Pos& p : chosen) out.push_back(extract_cuboid(seq, size, p.x, p.y, p.t));
  return out;
}

}  // namespace

std::vector<Cuboid> sample_cuboids(const FrameSequence& seq, std::span<const MotionMask> masks, double fraction,
                                   const CuboidGeometry& size, std::uint64_t seed,
                                   std::optional<std::size_t> max_count) {
  check_fraction(fraction);
  std::vector<Pos> chosen;
  std::mt19937_64 rng(seed);
  const std::size_t starts = seq.frames >= size.d ? std::min(masks.size(), seq.frames - size.d + 1) : 0;
  for (std::size_t t = 0; t < starts; ++t) sample_start(seq, masks[t], t, fraction, size, rng, chosen);
  return finish(seq, size, std::move(chosen), max_count, rng);
}

std::vector<Cuboid> sample_cuboids_at(const FrameSequence& seq, const MotionMask& mask, std::size_t t,
                                      double fraction, const CuboidGeometry& size, std::uint64_t seed,
                                      std::optional<std::size_t> max_count) {
  check_fraction(fraction);
  std::vector<Pos> chosen;
  std::mt19937_64 rng(seed);
  if (t + size.d <= seq.frames) sample_start(seq, mask, t, fraction, size, rng, chosen);
  return finish(seq, size, std::move(chosen), max_count, rng);
}

linalg::Matrix reformat(const Cuboid& c, std::size_t delta_t) {
  const std::size_t d = c.size.d;
  if (delta_t < 1 || delta_t > d)
    throw Error(ErrorCode::InvalidDelta, "delta_t " + std::to_string(delta_t) + " outside [1, " + std::to_string(d) + "]");
  const std::size_t patch = c.size.h * c.size.w;
  const std::size_t steps = d - delta_t + 1;
  linalg::Matrix out(steps, patch * delta_t);
  for (std::size_t t = 0; t < steps; ++t) {
    auto row = out.row(t);
    std::copy(c.data.begin() + static_cast<std::ptrdiff_t>(t * patch),
              c.data.begin() + static_cast<std::ptrdiff_t>((t + delta_t) * patch), row.begin());
  }
  return out;
}

std::size_t region_label(std::int64_t x, std::int64_t y, const BoundingBox& box, const Grid& grid) {
  if (!box.contains(x, y))
    throw Error(ErrorCode::OutsideBoundingBox,
                "position (" + std::to_string(x) + ", " + std::to_string(y) + ") outside the bounding box");
  const auto cols = static_cast<std::int64_t>(grid.cols);
  const auto rows = static_cast<std::int64_t>(grid.rows);
  const std::int64_t ix = std::min((x - box.x) * cols / box.w, cols - 1);
  const std::int64_t iy = std::min((y - box.y) * rows / box.h, rows - 1);
  return static_cast<std::size_t>(iy * cols + ix);
}

std::int64_t mirror_x(std::int64_t x, const BoundingBox& box) noexcept { return 2 * box.x + box.w - 1 - x; }

PreparedSequence prepare_sequence(const FrameSequence& raw, const DeltaRule& rule) {
  raw.validate();
  PreparedSequence p;
  p.normalized = normalize_sequence(raw);
  p.diffs = frame_difference(p.normalized);
  p.delta = rule.relative ? default_delta(p.diffs, rule.value) : rule.value;
  return p;
}

BoundingBox effective_box(const FrameSequence& seq, std::size_t t) {
  if (auto b = seq.box(t)) return *b;
  return {0, 0, static_cast<std::int32_t>(seq.width), static_cast<std::int32_t>(seq.height)};
}

void label_regions(std::span<Cuboid> cuboids, const FrameSequence& seq, const Grid& grid) {
  for (Cuboid& c : cuboids)
    c.region_label = static_cast<std::int32_t>(region_label(static_cast<std::int64_t>(c.x),
                                                            static_cast<std::int64_t>(c.y),
                                                            effective_box(seq, c.t), grid));
}

}  // namespace sfa
