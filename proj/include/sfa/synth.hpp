#pragma once

// Deterministic synthetic data: a two-channel toy problem with a known slow
// latent, and small rendered "action" videos for end-to-end checks.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sfa/cuboid.hpp"
#include "sfa/linalg.hpp"

namespace sfa::synth {

struct ToySignal {
  linalg::Matrix observed;  // T × 2
  linalg::Vector latent;    // sin(2πt/T)
};

/// x₁ = s + c², x₂ = c, where c is a fast seeded carrier; s is recoverable
/// linearly from the quadratic expansion of (x₁, x₂).
ToySignal toy_slow_signal(std::size_t frames, std::uint64_t seed);

enum class ActionKind : std::uint32_t {
  HBarOscillate = 0,  // horizontal bar moving up and down
  VBarOscillate = 1,  // vertical bar moving left and right
  BlobTranslate = 2,  // disc bouncing horizontally at constant speed
  BlobPulse = 3,      // disc at rest whose radius oscillates
};

std::string_view to_string(ActionKind kind) noexcept;

struct SynthSpec {
  ActionKind kind = ActionKind::HBarOscillate;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t frames = 60;
  double noise_sigma = 4.0;
  std::uint64_t seed = 1;  // pixel noise only

  // Motion parameters; the trajectory depends on these alone.
  double period = 12.0;     // frames per oscillation (bars, pulse)
  double speed = 1.5;       // pixels per frame (translate)
  double phase = 0.0;       // fraction of a period, or of the bounce path
  double size = 3.0;        // bar half-thickness or disc radius
  double length = 9.0;      // bar half-length; pulse amplitude
  double amplitude = 7.0;   // oscillation amplitude in pixels
  double tilt = 0.0;        // bar rotation in radians (bars only)
  double center_x = -1.0;   // negative: frame center
  double center_y = -1.0;
  double foreground = 210.0;
  double background = 60.0;
};

struct SyntheticAction {
  FrameSequence sequence;  // 0..255 integer intensities
  std::int32_t label = 0;
  BoundingBox box;  // whole frame
};

/// Renders the motion with antialiased edges plus Gaussian pixel noise.
/// Throws InvalidSpec for degenerate geometry.
SyntheticAction generate_action(const SynthSpec& spec);

struct BenchmarkSample {
  std::string name;
  SyntheticAction action;
  bool train = true;
};

struct BenchmarkOptions {
  std::size_t per_class = 20;
  std::size_t train_per_class = 15;
  std::size_t frames = 60;
  std::size_t height = 32;
  std::size_t width = 32;
  double noise_sigma = 20.0;
};

/// Four classes (one per ActionKind, label = kind) with per-sequence motion
/// parameters and a stratified train/test split, all drawn from `seed`.
std::vector<BenchmarkSample> make_benchmark(std::uint64_t seed, const BenchmarkOptions& options = {});

}  // namespace sfa::synth
