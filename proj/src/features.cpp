#include "sfa/features.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <tuple>

#include "sfa/error.hpp"
#include "sfa/rng.hpp"

namespace sfa {

Vector squared_derivative(const Cuboid& cuboid, const SlowFeatureModel& model, std::size_t delta_t) {
  if (delta_t >= cuboid.size.d) throw Error(ErrorCode::TooShort, "cuboid depth leaves no temporal difference");
  const Matrix y = apply_sequence(model, reformat(cuboid, delta_t));
  Vector v(y.cols(), 0.0);
  for (std::size_t t = 0; t + 1 < y.rows(); ++t)
    for (std::size_t j = 0; j < y.cols(); ++j) {
      const double d = y(t + 1, j) - y(t, j);
      v[j] += d * d;
    }
  const double inv = 1.0 / static_cast<double>(y.rows() - 1);
  for (double& x : v) x *= inv;
  return v;
}

Vector cuboid_contribution(const Cuboid& cuboid, const ModelBank& bank) {
  Vector out(bank.total_feature_count(), 0.0);
  std::size_t offset = 0;
  for (const auto& model : bank.models) {
    const std::size_t k = model.feature_count();
    const bool active = bank.strategy != Strategy::SDSFA || model.region_label == cuboid.region_label;
    if (active) {
      const Vector v = squared_derivative(cuboid, model, bank.geometry.delta_t);
      std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
    }
    offset += k;
  }
  return out;
}

namespace {

std::vector<std::size_t> canonical_order(std::span<const Cuboid> cuboids) {
  std::vector<std::size_t> order(cuboids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(cuboids[a].t, cuboids[a].y, cuboids[a].x) < std::tie(cuboids[b].t, cuboids[b].y, cuboids[b].x);
  });
  return order;
}

void l1_normalize(AsdFeature& f) {
  double sum = 0.0;
  for (double v : f.values) sum += v;
  if (sum > 0.0) {
    for (double& v : f.values) v /= sum;
    f.normalized = true;
  }
}

}  // namespace

AsdFeature asd_feature(std::span<const Cuboid> snippet, const ModelBank& bank) {
  if (snippet.empty()) throw Error(ErrorCode::EmptySnippet, "snippet has no cuboids");
  if (bank.strategy == Strategy::SDSFA)
    for (const auto& c : snippet)
      if (c.region_label < 0 || static_cast<std::size_t>(c.region_label) >= bank.grid.cells())
        throw Error(ErrorCode::InvalidInput, "SD-SFA features need region-labelled cuboids");
  AsdFeature f;
  f.values.assign(bank.total_feature_count(), 0.0);
  for (std::size_t i : canonical_order(snippet)) {
    const Vector v = cuboid_contribution(snippet[i], bank);
    for (std::size_t j = 0; j < v.size(); ++j) f.values[j] += v[j];
  }
  l1_normalize(f);
  return f;
}

AsdFeature mirror_feature(const AsdFeature& f, const Grid& grid, std::size_t per_region_block_dim) {
  if (f.values.size() != grid.cells() * per_region_block_dim)
    throw Error(ErrorCode::InvalidDimension, "feature dimension " + std::to_string(f.values.size()) +
                                                 " does not match grid × block size");
  AsdFeature out = f;
  for (std::size_t iy = 0; iy < grid.rows; ++iy)
    for (std::size_t ix = 0; ix < grid.cols; ++ix) {
      const std::size_t src = iy * grid.cols + ix;
      const std::size_t dst = iy * grid.cols + (grid.cols - 1 - ix);
      std::copy_n(f.values.begin() + static_cast<std::ptrdiff_t>(src * per_region_block_dim), per_region_block_dim,
                  out.values.begin() + static_cast<std::ptrdiff_t>(dst * per_region_block_dim));
    }
  return out;
}

std::vector<Cuboid> snippet_cuboids(const PreparedSequence& prepared, std::size_t start,
                                    const CuboidGeometry& geometry, const Grid& grid,
                                    const SamplingParams& params, std::uint64_t seed) {
  const FrameSequence& seq = prepared.normalized;
  const MotionMask mask = motion_boundary(prepared.diffs.frame(start), prepared.delta, seq.box(start));
  std::vector<Cuboid> cuboids = sample_cuboids_at(seq, mask, start, params.fraction, geometry, seed, params.max_count);
  label_regions(cuboids, seq, grid);
  return cuboids;
}

namespace {

template <class Featurizer>
std::vector<AsdFeature> per_snippet(const FrameSequence& raw, const CuboidGeometry& geometry,
                                    const SamplingParams& params, std::uint64_t seed, std::uint32_t sequence_id,
                                    Featurizer&& featurize) {
  if (raw.frames < geometry.d)
    throw Error(ErrorCode::TooShort, "sequence of " + std::to_string(raw.frames) + " frames is shorter than d = " +
                                         std::to_string(geometry.d));
  if (params.stride < 1) throw Error(ErrorCode::InvalidInput, "stride must be at least 1");
  if (geometry.d < 2) throw Error(ErrorCode::TooShort, "cuboid depth must be at least 2");
  const PreparedSequence prepared = prepare_sequence(raw, params.delta);
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + geometry.d <= raw.frames; s += params.stride) starts.push_back(s);

  std::vector<AsdFeature> out(starts.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(starts.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      const std::size_t s = starts[static_cast<std::size_t>(i)];
      AsdFeature f = featurize(prepared, s, derive_seed(seed, sequence_id, s));
      f.sequence_id = sequence_id;
      f.start_frame = static_cast<std::uint32_t>(s);
      out[static_cast<std::size_t>(i)] = std::move(f);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace

std::vector<AsdFeature> featurize_sequence(const FrameSequence& raw, const ModelBank& bank,
                                           const SamplingParams& params, std::uint64_t seed,
                                           std::uint32_t sequence_id) {
  return per_snippet(raw, bank.geometry, params, seed, sequence_id,
                     [&](const PreparedSequence& prepared, std::size_t s, std::uint64_t snippet_seed) {
                       const auto cuboids = snippet_cuboids(prepared, s, bank.geometry, bank.grid, params, snippet_seed);
                       if (cuboids.empty()) return AsdFeature{Vector(bank.total_feature_count(), 0.0)};
                       return asd_feature(cuboids, bank);
                     });
}

ModelBank pixel_pca_bank(const linalg::PcaModel& pca, const CuboidGeometry& geometry) {
  if (pca.in_dim() != geometry.raw_dim())
    throw Error(ErrorCode::InvalidDimension, "PCA input dimension does not match the reformatted cuboid");
  SlowFeatureModel m;
  m.pca = pca;
  m.expansion = ExpansionSpec::make(ExpansionKind::Identity, pca.out_dim());
  m.h0.assign(pca.out_dim(), 0.0);
  m.w = Matrix::identity(pca.out_dim());
  m.eigenvalues.assign(pca.out_dim(), 0.0);
  ModelBank bank;
  bank.geometry = geometry;
  bank.models.push_back(std::move(m));
  return bank;
}

}  // namespace sfa
