#pragma once

// Linear one-vs-rest max-margin classification plus the evaluation metrics
// used in reports: majority voting, frame accuracy, confusion matrices,
// selectivity ratios and Fisher scores.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sfa/linalg.hpp"

namespace sfa {

using linalg::Matrix;
using linalg::Vector;

struct LinearClassifier {
  Matrix weights;  // classes × dim
  Vector biases;
  std::vector<std::int32_t> labels;  // row i scores labels[i]; ascending
  std::vector<std::string> class_names;

  std::size_t classes() const noexcept { return weights.rows(); }
  std::size_t dim() const noexcept { return weights.cols(); }
  friend bool operator==(const LinearClassifier&, const LinearClassifier&) = default;
};

struct TrainOptions {
  double c_param = 1.0;
  std::size_t epochs = 50;
  std::uint64_t seed = 1;
};

/// One-vs-rest hinge loss, minimized per class by seeded stochastic
/// subgradient descent with averaged iterates. Features are standardized per
/// dimension for training and the scaling is folded back into the weights.
/// When `objective_trace` is given it receives the summed one-vs-rest
/// objective of the averaged iterate after every epoch.
LinearClassifier train_linear(std::span<const Vector> features, std::span<const std::int32_t> labels,
                              const TrainOptions& options, std::vector<double>* objective_trace = nullptr);

Vector scores(const LinearClassifier& clf, std::span<const double> feature);
/// Label with the highest score; ties go to the lowest class index.
std::int32_t predict(const LinearClassifier& clf, std::span<const double> feature);

/// Most frequent label; ties go to the lowest label.
std::int32_t majority_vote(std::span<const std::int32_t> labels);

double frame_accuracy(std::span<const std::int32_t> predicted, std::span<const std::int32_t> truth);

struct ConfusionMatrix {
  std::vector<std::int32_t> labels;
  std::vector<std::vector<std::size_t>> counts;  // [predicted][true]

  std::size_t total() const noexcept;
  std::size_t trace() const noexcept;
  double accuracy() const noexcept { return total() == 0 ? 0.0 : double(trace()) / double(total()); }
  std::size_t column_sum(std::size_t true_index) const noexcept;
};

/// Labels outside `labels` raise InvalidInput.
ConfusionMatrix confusion_matrix(std::span<const std::int32_t> predicted, std::span<const std::int32_t> truth,
                                 std::span<const std::int32_t> labels);

struct SelectivityTable {
  Matrix ratios;  // (i, j): class-i cuboids under class-j functions over class-i functions
  Vector row_selectivity;  // smallest off-diagonal ratio per row
  double average = 0.0;
};

/// `block_sums(i, j)` is the summed feature of class-i cuboids under class-j
/// functions.
SelectivityTable selectivity_table(const Matrix& block_sums);

struct FisherScores {
  Vector per_dimension;
  double mean = 0.0;
};

inline constexpr double kFisherEpsilon = 1e-12;

/// Two classes: (μ₁−μ₂)² / (σ₁²+σ₂²+ε). More classes: Σ n_c(μ_c−μ)² /
/// (Σ n_c σ_c² + ε). Variances are population variances.
FisherScores fisher_score(std::span<const Vector> features, std::span<const std::int32_t> labels);

}  // namespace sfa
