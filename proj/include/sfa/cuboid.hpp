#pragma once

// Sequence preprocessing and cuboid harvesting: normalization, frame
// differencing, Sobel motion boundaries, seeded sampling, reformatting into
// vector sequences, and region labels inside the foreground box.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sfa/linalg.hpp"
#include "sfa/sfa.hpp"

namespace sfa {

struct BoundingBox {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t w = 0;
  std::int32_t h = 0;

  bool contains(std::int64_t px, std::int64_t py) const noexcept {
    return px >= x && py >= y && px < x + w && py < y + h;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Read-only view of one frame.
struct Frame {
  std::span<const double> pixels;
  std::size_t height = 0;
  std::size_t width = 0;
  double at(std::size_t y, std::size_t x) const noexcept { return pixels[y * width + x]; }
};

struct FrameSequence {
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;  // frame-major, row-major
  std::vector<std::optional<BoundingBox>> boxes;  // empty, or one per frame

  FrameSequence() = default;
  FrameSequence(std::size_t t, std::size_t h, std::size_t w)
      : frames(t), height(h), width(w), pixels(t * h * w, 0.0) {}

  std::size_t frame_size() const noexcept { return height * width; }
  double& at(std::size_t t, std::size_t y, std::size_t x) noexcept {
    return pixels[(t * height + y) * width + x];
  }
  double at(std::size_t t, std::size_t y, std::size_t x) const noexcept {
    return pixels[(t * height + y) * width + x];
  }
  Frame frame(std::size_t t) const noexcept {
    return {std::span<const double>(pixels).subspan(t * frame_size(), frame_size()), height, width};
  }
  std::optional<BoundingBox> box(std::size_t t) const noexcept {
    return t < boxes.size() ? boxes[t] : std::nullopt;
  }
  /// Throws InvalidInput when shapes disagree or a box leaves the frame.
  void validate() const;
};

struct Cuboid {
  std::size_t x = 0;  // spatial center
  std::size_t y = 0;
  std::size_t t = 0;  // first frame
  CuboidGeometry size;  // delta_t is not used here
  std::vector<double> data;  // d frames of h×w, row-major
  std::int32_t class_label = -1;
  std::int32_t region_label = -1;
};

struct MotionMask {
  std::size_t height = 0;
  std::size_t width = 0;
  double delta = 0.0;
  std::vector<std::uint8_t> mask;

  bool at(std::size_t y, std::size_t x) const noexcept { return mask[y * width + x] != 0; }
  std::size_t count() const noexcept;
};

/// Zero mean, unit variance over every pixel of the sequence.
FrameSequence normalize_sequence(const FrameSequence& seq);

/// out[t] = in[t+1] − in[t]; boxes follow the earlier frame.
FrameSequence frame_difference(const FrameSequence& seq);

/// Sobel gradient magnitude; border pixels are 0.
std::vector<double> sobel_magnitude(const Frame& frame);

MotionMask motion_boundary(const Frame& diff, double delta, std::optional<BoundingBox> box = std::nullopt);

/// 0.1 × the 99th-percentile Sobel magnitude over every difference frame.
double default_delta(const FrameSequence& diffs, double scale = 0.1, double percentile = 0.99);

/// Whether an h×w×d cuboid centered at (x, y) starting at t fits.
bool cuboid_fits(const FrameSequence& seq, const CuboidGeometry& size, std::size_t x, std::size_t y,
                 std::size_t t) noexcept;

Cuboid extract_cuboid(const FrameSequence& seq, const CuboidGeometry& size, std::size_t x, std::size_t y,
                      std::size_t t);

/// masks[t] drives start time t. Among masked pixels whose cuboid fits,
/// ⌈fraction·n⌉ are drawn without replacement. Output is sorted by (t, y, x)
/// and, with max_count, truncated to a seeded subset.
std::vector<Cuboid> sample_cuboids(const FrameSequence& seq, std::span<const MotionMask> masks, double fraction,
                                   const CuboidGeometry& size, std::uint64_t seed,
                                   std::optional<std::size_t> max_count = std::nullopt);

/// (d − Δt + 1) × (h·w·Δt): row t concatenates patches t..t+Δt−1.
/// Single start time: samples on `mask` only, for cuboids starting at `t`.
std::vector<Cuboid> sample_cuboids_at(const FrameSequence& seq, const MotionMask& mask, std::size_t t,
                                      double fraction, const CuboidGeometry& size, std::uint64_t seed,
                                      std::optional<std::size_t> max_count = std::nullopt);

linalg::Matrix reformat(const Cuboid& cuboid, std::size_t delta_t);

std::size_t region_label(std::int64_t x, std::int64_t y, const BoundingBox& box, const Grid& grid);

/// Horizontal reflection of x inside the box.
std::int64_t mirror_x(std::int64_t x, const BoundingBox& box) noexcept;

/// Normalized sequence, its difference frames, and the motion threshold.
struct PreparedSequence {
  FrameSequence normalized;
  FrameSequence diffs;
  double delta = 0.0;
};

struct DeltaRule {
  bool relative = true;
  double value = 0.1;  // scale of the 99th percentile, or an absolute threshold
};

PreparedSequence prepare_sequence(const FrameSequence& raw, const DeltaRule& rule);

/// Whole frame when no box is given.
BoundingBox effective_box(const FrameSequence& seq, std::size_t t);

/// Assigns region labels from the box at each cuboid's first frame.
void label_regions(std::span<Cuboid> cuboids, const FrameSequence& seq, const Grid& grid);

}  // namespace sfa
