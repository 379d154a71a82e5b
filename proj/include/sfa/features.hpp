#pragma once

// Accumulated squared derivative (ASD) features over action snippets, the
// region-block mirror, and a raw-pixel baseline descriptor.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sfa/cuboid.hpp"
#include "sfa/sfa.hpp"

namespace sfa {

struct AsdFeature {
  Vector values;
  std::uint32_t sequence_id = 0;
  std::uint32_t start_frame = 0;
  bool normalized = false;
  friend bool operator==(const AsdFeature&, const AsdFeature&) = default;
};

/// Per-function mean squared forward difference of the transformed,
/// reformatted cuboid.
Vector squared_derivative(const Cuboid& cuboid, const SlowFeatureModel& model, std::size_t delta_t);

/// Sum of squared derivatives over the snippet's cuboids, L1-normalized.
/// Cuboids are summed in (t, y, x) order regardless of input order. A snippet
/// without motion yields an all-zero, unnormalized feature.
AsdFeature asd_feature(std::span<const Cuboid> snippet, const ModelBank& bank);

/// Unnormalized contribution of one cuboid (zero outside its region blocks
/// for SDSFA).
Vector cuboid_contribution(const Cuboid& cuboid, const ModelBank& bank);

/// Swaps region blocks ix ↔ cols−1−ix within each grid row.
AsdFeature mirror_feature(const AsdFeature& f, const Grid& grid, std::size_t per_region_block_dim);

struct SamplingParams {
  double fraction = 0.25;
  DeltaRule delta;
  std::size_t stride = 1;
  std::optional<std::size_t> max_count;
};

/// One feature per snippet start s = 0, stride, .. ≤ N − d. Cuboids start at
/// the snippet's first frame on that frame's motion boundary.
std::vector<AsdFeature> featurize_sequence(const FrameSequence& raw, const ModelBank& bank,
                                           const SamplingParams& params, std::uint64_t seed,
                                           std::uint32_t sequence_id = 0);

/// Cuboids of the snippet starting at `start`, region-labelled for the bank's
/// grid.
std::vector<Cuboid> snippet_cuboids(const PreparedSequence& prepared, std::size_t start,
                                    const CuboidGeometry& geometry, const Grid& grid,
                                    const SamplingParams& params, std::uint64_t seed);

/// Baseline bank: the PCA projection of the reformatted raw cuboid with no
/// slow feature transform, so its ASD features measure raw pixel motion energy
/// per principal component.
ModelBank pixel_pca_bank(const linalg::PcaModel& pca, const CuboidGeometry& geometry);

}  // namespace sfa
