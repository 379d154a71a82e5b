#include "sfa/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "sfa/error.hpp"
#include "sfa/rng.hpp"

namespace sfa::synth {

using std::numbers::pi;

ToySignal toy_slow_signal(std::size_t frames, std::uint64_t seed) {
  if (frames < 100) throw Error(ErrorCode::InvalidSpec, "toy signal needs at least 100 samples");
  std::mt19937_64 rng(seed);
  // carrier: sum of two fast sinusoids with seeded frequencies and phases
  const double f1 = 0.11 + 0.05 * uniform01(rng);
  const double f2 = 0.29 + 0.05 * uniform01(rng);
  const double p1 = 2.0 * pi * uniform01(rng);
  const double p2 = 2.0 * pi * uniform01(rng);
  ToySignal out{linalg::Matrix(frames, 2), linalg::Vector(frames)};
  for (std::size_t t = 0; t < frames; ++t) {
    const double td = static_cast<double>(t);
    const double s = std::sin(2.0 * pi * td / static_cast<double>(frames));
    const double c = std::sin(2.0 * pi * f1 * td + p1) + 0.5 * std::sin(2.0 * pi * f2 * td + p2);
    out.latent[t] = s;
    out.observed(t, 0) = s + c * c;
    out.observed(t, 1) = c;
  }
  return out;
}

std::string_view to_string(ActionKind kind) noexcept {
  switch (kind) {
    case ActionKind::HBarOscillate: return "h_bar_oscillate";
    case ActionKind::VBarOscillate: return "v_bar_oscillate";
    case ActionKind::BlobTranslate: return "blob_translate";
    case ActionKind::BlobPulse: return "blob_pulse";
  }
  return "unknown";
}

namespace {

double coverage(double inside_distance) { return std::clamp(inside_distance + 0.5, 0.0, 1.0); }

// Position along a bounce path of the given length (triangle wave).
double bounce(double travelled, double path) {
  if (path <= 0.0) return 0.0;
  const double m = std::fmod(travelled, 2.0 * path);
  return m <= path ? m : 2.0 * path - m;
}

}  // namespace

SyntheticAction generate_action(const SynthSpec& spec) {
  if (spec.height < 3 || spec.width < 3 || spec.frames < 2)
    throw Error(ErrorCode::InvalidSpec, "frame must be at least 3×3 with two frames");
  if (!(spec.noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidSpec, "noise sigma must be nonnegative");
  if (!(spec.size > 0.0) || !(spec.period > 0.0))
    throw Error(ErrorCode::InvalidSpec, "size and period must be positive");
  const double w = static_cast<double>(spec.width);
  const double h = static_cast<double>(spec.height);
  const double cx = spec.center_x < 0.0 ? (w - 1.0) / 2.0 : spec.center_x;
  const double cy = spec.center_y < 0.0 ? (h - 1.0) / 2.0 : spec.center_y;

  switch (spec.kind) {
    case ActionKind::HBarOscillate:
      if (2.0 * spec.length > w || 2.0 * spec.size > h)
        throw Error(ErrorCode::InvalidSpec, "horizontal bar does not fit the frame");
      break;
    case ActionKind::VBarOscillate:
      if (2.0 * spec.length > h || 2.0 * spec.size > w)
        throw Error(ErrorCode::InvalidSpec, "vertical bar does not fit the frame");
      break;
    case ActionKind::BlobTranslate:
      if (2.0 * spec.size >= w || 2.0 * spec.size > h) throw Error(ErrorCode::InvalidSpec, "disc does not fit the frame");
      break;
    case ActionKind::BlobPulse:
      if (2.0 * (spec.size + spec.length) > std::min(w, h) || spec.length >= spec.size)
        throw Error(ErrorCode::InvalidSpec, "pulsing disc does not fit the frame");
      break;
  }

  SyntheticAction out;
  out.label = static_cast<std::int32_t>(spec.kind);
  out.sequence = FrameSequence(spec.frames, spec.height, spec.width);
  out.box = {0, 0, static_cast<std::int32_t>(spec.width), static_cast<std::int32_t>(spec.height)};
  out.sequence.boxes.assign(spec.frames, out.box);

  std::mt19937_64 rng(spec.seed);
  const double travel_path = w - 1.0 - 2.0 * spec.size;
  const double cos_tilt = std::cos(spec.tilt);
  const double sin_tilt = std::sin(spec.tilt);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const double td = static_cast<double>(t);
    const double angle = 2.0 * pi * (td / spec.period + spec.phase);
    for (std::size_t y = 0; y < spec.height; ++y)
      for (std::size_t x = 0; x < spec.width; ++x) {
        const double px = static_cast<double>(x);
        const double py = static_cast<double>(y);
        double cov = 0.0;
        switch (spec.kind) {
          case ActionKind::HBarOscillate: {
            // bar frame: u along the bar, v across it
            const double by = cy + spec.amplitude * std::sin(angle);
            const double u = (px - cx) * cos_tilt + (py - by) * sin_tilt;
            const double v = -(px - cx) * sin_tilt + (py - by) * cos_tilt;
            cov = coverage(spec.size - std::abs(v)) * coverage(spec.length - std::abs(u));
            break;
          }
          case ActionKind::VBarOscillate: {
            const double bx = cx + spec.amplitude * std::sin(angle);
            const double u = (py - cy) * cos_tilt - (px - bx) * sin_tilt;
            const double v = (py - cy) * sin_tilt + (px - bx) * cos_tilt;
            cov = coverage(spec.size - std::abs(v)) * coverage(spec.length - std::abs(u));
            break;
          }
          case ActionKind::BlobTranslate: {
            const double start = spec.phase * 2.0 * travel_path;
            const double bx = spec.size + bounce(start + spec.speed * td, travel_path);
            cov = coverage(spec.size - std::hypot(px - bx, py - cy));
            break;
          }
          case ActionKind::BlobPulse: {
            const double r = spec.size + spec.length * std::sin(angle);
            cov = coverage(r - std::hypot(px - cx, py - cy));
            break;
          }
        }
        double v = spec.background + (spec.foreground - spec.background) * cov;
        if (spec.noise_sigma > 0.0) v += spec.noise_sigma * standard_normal(rng);
        out.sequence.at(t, y, x) = std::clamp(std::round(v), 0.0, 255.0);
      }
  }
  return out;
}

std::vector<BenchmarkSample> make_benchmark(std::uint64_t seed, const BenchmarkOptions& options) {
  if (options.train_per_class > options.per_class)
    throw Error(ErrorCode::InvalidSpec, "train split larger than the class size");
  std::vector<BenchmarkSample> out;
  std::mt19937_64 rng(derive_seed(seed, 0x5eed));
  const std::array kinds{ActionKind::HBarOscillate, ActionKind::VBarOscillate, ActionKind::BlobTranslate,
                         ActionKind::BlobPulse};
  const double w = static_cast<double>(options.width);
  const double h = static_cast<double>(options.height);
  for (ActionKind kind : kinds) {
    std::vector<std::size_t> order(options.per_class);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    partial_shuffle(order, order.size(), rng);
    std::vector<bool> is_train(options.per_class, false);
    for (std::size_t i = 0; i < options.train_per_class; ++i) is_train[order[i]] = true;

    for (std::size_t i = 0; i < options.per_class; ++i) {
      SynthSpec spec;
      spec.kind = kind;
      spec.height = options.height;
      spec.width = options.width;
      spec.frames = options.frames;
      spec.noise_sigma = options.noise_sigma;
      spec.seed = derive_seed(seed, static_cast<std::uint64_t>(kind), i);
      spec.phase = uniform01(rng);
      const double jitter_x = (uniform01(rng) - 0.5) * 0.2 * w;
      const double jitter_y = (uniform01(rng) - 0.5) * 0.2 * h;
      spec.center_x = (w - 1.0) / 2.0 + jitter_x;
      spec.center_y = (h - 1.0) / 2.0 + jitter_y;
      // Appearance nuisance shared by all classes: polarity, contrast, scale.
      const double contrast = 60.0 + 90.0 * uniform01(rng);
      const double mid = 110.0 + 40.0 * uniform01(rng);
      const bool dark_object = uniform01(rng) < 0.5;
      spec.foreground = mid + (dark_object ? -0.5 : 0.5) * contrast;
      spec.background = mid + (dark_object ? 0.5 : -0.5) * contrast;
      const double scale = 0.6 + 0.8 * uniform01(rng);
      switch (kind) {
        case ActionKind::HBarOscillate:
        case ActionKind::VBarOscillate:
          spec.period = 8.0 + 8.0 * uniform01(rng);
          spec.tilt = (uniform01(rng) - 0.5) * (pi / 4.0);
          spec.size = 2.0 * scale;
          spec.length = 0.3 * scale * std::min(w, h);
          spec.amplitude = (0.1 + 0.15 * uniform01(rng)) * std::min(w, h);
          break;
        case ActionKind::BlobTranslate:
          spec.speed = 0.6 + 1.4 * uniform01(rng);
          spec.size = 0.15 * scale * std::min(w, h);
          break;
        case ActionKind::BlobPulse:
          spec.period = 6.0 + 8.0 * uniform01(rng);
          spec.size = 0.2 * scale * std::min(w, h);
          spec.length = 0.1 * scale * std::min(w, h);
          break;
      }
      char name[64];
      std::snprintf(name, sizeof name, "%s_%02zu", std::string(to_string(kind)).c_str(), i);
      out.push_back({name, generate_action(spec), is_train[i]});
    }
  }
  return out;
}

}  // namespace sfa::synth
