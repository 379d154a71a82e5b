#pragma once

// Slow feature learning: quadratic expansion, the four learning strategies
// (unsupervised, supervised, discriminative, spatial discriminative) and the
// instantaneous transform of a learned function.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sfa/linalg.hpp"

namespace sfa {

using linalg::Matrix;
using linalg::Vector;

enum class Strategy : std::uint32_t { USFA = 0, SSFA = 1, DSFA = 2, SDSFA = 3 };

std::string_view to_string(Strategy s) noexcept;
/// Accepts "usfa", "ssfa", "dsfa", "sdsfa" (case-insensitive).
Strategy parse_strategy(std::string_view text);

enum class ExpansionKind : std::uint32_t { Identity = 0, Quadratic = 1 };

struct ExpansionSpec {
  ExpansionKind kind = ExpansionKind::Quadratic;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;

  static ExpansionSpec make(ExpansionKind kind, std::size_t input_dim);
  friend bool operator==(const ExpansionSpec&, const ExpansionSpec&) = default;
};

/// [x_1..x_I, x_1x_1, x_1x_2, .., x_1x_I, x_2x_2, .., x_Ix_I]
Vector quadratic_expand(std::span<const double> x);
Vector expand(const ExpansionSpec& spec, std::span<const double> x);

/// Spatial grid dividing the foreground box; region index = iy·cols + ix.
struct Grid {
  std::size_t cols = 1;  // along x
  std::size_t rows = 1;  // along y
  std::size_t cells() const noexcept { return cols * rows; }
  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Cuboid extent in pixels × pixels × frames plus the reformatting window.
struct CuboidGeometry {
  std::size_t h = 16;
  std::size_t w = 16;
  std::size_t d = 7;
  std::size_t delta_t = 3;
  std::size_t raw_dim() const noexcept { return h * w * delta_t; }
  std::size_t steps() const noexcept { return d - delta_t + 1; }
  friend bool operator==(const CuboidGeometry&, const CuboidGeometry&) = default;
};

struct SlowFeatureModel {
  linalg::PcaModel pca;
  ExpansionSpec expansion;
  Vector h0;
  Matrix w;  // expanded_dim × K
  Vector eigenvalues;
  Strategy strategy = Strategy::USFA;
  std::optional<std::int32_t> class_label;
  std::optional<std::int32_t> region_label;
  std::optional<double> gamma;

  std::size_t input_dim() const noexcept { return pca.in_dim(); }
  std::size_t feature_count() const noexcept { return w.cols(); }
  friend bool operator==(const SlowFeatureModel&, const SlowFeatureModel&) = default;
};

struct ModelBank {
  Strategy strategy = Strategy::USFA;
  Grid grid;
  CuboidGeometry geometry;
  std::vector<std::int32_t> classes;  // ascending
  /// USFA: one model. SSFA/DSFA: one per class, ascending. SDSFA: region-major,
  /// class-minor.
  std::vector<SlowFeatureModel> models;

  std::size_t total_feature_count() const noexcept;
  /// Index of the model for (class, region); throws InvalidInput if absent.
  std::size_t model_index(std::int32_t class_label, std::int32_t region_label = 0) const;
  friend bool operator==(const ModelBank&, const ModelBank&) = default;
};

/// One cuboid as a short vector sequence (time × raw_dim). Unlabelled data
/// uses -1.
struct Minisequence {
  Matrix data;
  std::int32_t class_label = -1;
  std::int32_t region_label = -1;
};

struct FitOptions {
  std::size_t pca_dim = 50;
  std::size_t k = 200;  // per class (and region)
  double gamma = 0.2;
  double rel_cutoff = linalg::kDefaultRelCutoff;
  ExpansionKind expansion = ExpansionKind::Quadratic;
  Grid grid{2, 3};
};

ModelBank fit_usfa(std::span<const Minisequence> data, const FitOptions& options);
ModelBank fit_ssfa(std::span<const Minisequence> data, const FitOptions& options);
ModelBank fit_dsfa(std::span<const Minisequence> data, const FitOptions& options);
ModelBank fit_sdsfa(std::span<const Minisequence> data, const FitOptions& options);
ModelBank fit(Strategy strategy, std::span<const Minisequence> data, const FitOptions& options);

/// y = Wᵀ(expand(pca(x)) − h0)
Vector apply(const SlowFeatureModel& model, std::span<const double> x);
/// Row-wise apply over a (time × raw_dim) sequence.
Matrix apply_sequence(const SlowFeatureModel& model, const Matrix& x);

/// Mean squared forward difference of a scalar sequence.
double delta_value(std::span<const double> y);

/// Lower-level pieces of the fit, exposed for tests and tools.
linalg::PcaModel fit_shared_pca(std::span<const Minisequence> data, std::size_t pca_dim);
std::vector<Matrix> expand_minisequences(const linalg::PcaModel& pca, const ExpansionSpec& spec,
                                         std::span<const Minisequence> data);

/// Worst-case deviation of a model's outputs from zero mean, unit variance and
/// decorrelation on the given raw minisequences.
struct ConstraintReport {
  double max_abs_mean = 0.0;
  double max_variance_error = 0.0;
  double max_abs_correlation = 0.0;
  bool satisfied(double mean_tol = 1e-6, double var_tol = 1e-4, double corr_tol = 1e-4) const noexcept {
    return max_abs_mean < mean_tol && max_variance_error < var_tol && max_abs_correlation < corr_tol;
  }
};
ConstraintReport check_constraints(const SlowFeatureModel& model, std::span<const Minisequence> data);

/// The minisequences a model's constraints are defined over: everything for
/// USFA/DSFA, the model's class for SSFA, the model's region for SDSFA.
std::vector<Minisequence> constraint_set(const ModelBank& bank, std::size_t model_index,
                                         std::span<const Minisequence> data);

}  // namespace sfa
