#include "sfa/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "sfa/error.hpp"
#include "sfa/rng.hpp"

namespace sfa {

namespace {

struct Standardizer {
  Vector mean;
  Vector scale;  // 1 / std, or 1 for constant dimensions
};

Standardizer fit_standardizer(std::span<const Vector> x, std::size_t dim) {
  Standardizer s{Vector(dim, 0.0), Vector(dim, 1.0)};
  for (const auto& v : x)
    for (std::size_t j = 0; j < dim; ++j) s.mean[j] += v[j];
  for (double& m : s.mean) m /= static_cast<double>(x.size());
  Vector var(dim, 0.0);
  for (const auto& v : x)
    for (std::size_t j = 0; j < dim; ++j) var[j] += (v[j] - s.mean[j]) * (v[j] - s.mean[j]);
  for (std::size_t j = 0; j < dim; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(x.size()));
    if (sd > 1e-12) s.scale[j] = 1.0 / sd;
  }
  return s;
}

// Standardized samples with a trailing constant 1 for the bias.
std::vector<Vector> augment(std::span<const Vector> x, const Standardizer& s) {
  std::vector<Vector> out;
  out.reserve(x.size());
  for (const auto& v : x) {
    Vector a(v.size() + 1, 1.0);
    for (std::size_t j = 0; j < v.size(); ++j) a[j] = (v[j] - s.mean[j]) * s.scale[j];
    out.push_back(std::move(a));
  }
  return out;
}

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

double objective(const Vector& w, const std::vector<Vector>& x, const std::vector<double>& y, double lambda) {
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) hinge += std::max(0.0, 1.0 - y[i] * dot(w, x[i]));
  return 0.5 * lambda * dot(w, w) + hinge / static_cast<double>(x.size());
}

}  // namespace

LinearClassifier train_linear(std::span<const Vector> features, std::span<const std::int32_t> labels,
                              const TrainOptions& options, std::vector<double>* objective_trace) {
  if (features.size() != labels.size())
    throw Error(ErrorCode::InvalidDimension, "feature and label counts differ");
  if (features.empty()) throw Error(ErrorCode::EmptyInput, "no training samples");
  if (!(options.c_param > 0.0)) throw Error(ErrorCode::InvalidInput, "C must be positive");
  const std::size_t dim = features.front().size();
  for (const auto& f : features)
    if (f.size() != dim) throw Error(ErrorCode::InvalidDimension, "feature dimensions differ");
  const std::set<std::int32_t> label_set(labels.begin(), labels.end());
  if (label_set.size() < 2) throw Error(ErrorCode::SingleClass, "training data holds a single class");

  const Standardizer standardizer = fit_standardizer(features, dim);
  const std::vector<Vector> x = augment(features, standardizer);
  const std::size_t n = x.size();
  const double lambda = 1.0 / (options.c_param * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);

  LinearClassifier clf;
  clf.labels.assign(label_set.begin(), label_set.end());
  clf.weights = Matrix(clf.labels.size(), dim);
  clf.biases.assign(clf.labels.size(), 0.0);
  if (objective_trace) objective_trace->assign(options.epochs, 0.0);

  std::vector<std::size_t> order(n);
  for (std::size_t c = 0; c < clf.labels.size(); ++c) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == clf.labels[c] ? 1.0 : -1.0;
    std::mt19937_64 rng(derive_seed(options.seed, c));
    Vector w(dim + 1, 0.0), avg(dim + 1, 0.0);
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      partial_shuffle(order, n, rng);
      for (std::size_t i : order) {
        ++step;
        const double eta = 1.0 / (lambda * static_cast<double>(step));
        const double margin = y[i] * dot(w, x[i]);
        const double shrink = 1.0 - eta * lambda;
        for (double& v : w) v *= shrink;
        if (margin < 1.0)
          for (std::size_t j = 0; j <= dim; ++j) w[j] += eta * y[i] * x[i][j];
        const double norm = std::sqrt(dot(w, w));
        if (norm > radius)
          for (double& v : w) v *= radius / norm;
        const double mix = 1.0 / static_cast<double>(step);
        for (std::size_t j = 0; j <= dim; ++j) avg[j] += (w[j] - avg[j]) * mix;
      }
      if (objective_trace) (*objective_trace)[epoch] += objective(avg, x, y, lambda);
    }
    // undo the standardization: score = Σ w_j (x_j − μ_j) s_j + b
    double bias = avg[dim];
    for (std::size_t j = 0; j < dim; ++j) {
      clf.weights(c, j) = avg[j] * standardizer.scale[j];
      bias -= clf.weights(c, j) * standardizer.mean[j];
    }
    clf.biases[c] = bias;
  }
  for (std::int32_t l : clf.labels) clf.class_names.push_back("class" + std::to_string(l));
  return clf;
}

Vector scores(const LinearClassifier& clf, std::span<const double> feature) {
  if (feature.size() != clf.dim())
    throw Error(ErrorCode::InvalidDimension, "classifier expects dimension " + std::to_string(clf.dim()));
  Vector s = linalg::multiply(clf.weights, feature);
  for (std::size_t c = 0; c < s.size(); ++c) s[c] += clf.biases[c];
  return s;
}

std::int32_t predict(const LinearClassifier& clf, std::span<const double> feature) {
  const Vector s = scores(clf, feature);
  std::size_t best = 0;
  for (std::size_t c = 1; c < s.size(); ++c)
    if (s[c] > s[best]) best = c;
  return clf.labels.empty() ? static_cast<std::int32_t>(best) : clf.labels[best];
}

std::int32_t majority_vote(std::span<const std::int32_t> labels) {
  if (labels.empty()) throw Error(ErrorCode::EmptyInput, "no labels to vote on");
  std::map<std::int32_t, std::size_t> counts;
  for (auto l : labels) ++counts[l];
  std::int32_t best = counts.begin()->first;
  std::size_t best_count = 0;
  for (const auto& [label, count] : counts)
    if (count > best_count) {
      best = label;
      best_count = count;
    }
  return best;
}

double frame_accuracy(std::span<const std::int32_t> predicted, std::span<const std::int32_t> truth) {
  if (predicted.size() != truth.size() || predicted.empty())
    throw Error(ErrorCode::InvalidInput, "prediction and truth lengths must match and be nonzero");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predicted[i] == truth[i];
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t s = 0;
  for (const auto& row : counts) s += std::accumulate(row.begin(), row.end(), std::size_t{0});
  return s;
}

std::size_t ConfusionMatrix::trace() const noexcept {
  std::size_t s = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) s += counts[i][i];
  return s;
}

std::size_t ConfusionMatrix::column_sum(std::size_t true_index) const noexcept {
  std::size_t s = 0;
  for (const auto& row : counts) s += row[true_index];
  return s;
}

ConfusionMatrix confusion_matrix(std::span<const std::int32_t> predicted, std::span<const std::int32_t> truth,
                                 std::span<const std::int32_t> labels) {
  if (predicted.size() != truth.size()) throw Error(ErrorCode::InvalidInput, "prediction and truth lengths differ");
  ConfusionMatrix cm;
  cm.labels.assign(labels.begin(), labels.end());
  cm.counts.assign(labels.size(), std::vector<std::size_t>(labels.size(), 0));
  auto index = [&](std::int32_t l) {
    const auto it = std::find(labels.begin(), labels.end(), l);
    if (it == labels.end()) throw Error(ErrorCode::InvalidInput, "label " + std::to_string(l) + " not in label set");
    return static_cast<std::size_t>(it - labels.begin());
  };
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[index(predicted[i])][index(truth[i])];
  return cm;
}

SelectivityTable selectivity_table(const Matrix& block_sums) {
  if (!block_sums.square() || block_sums.rows() < 2)
    throw Error(ErrorCode::InvalidInput, "selectivity needs a square table of at least two classes");
  const std::size_t c = block_sums.rows();
  SelectivityTable t;
  t.ratios = Matrix(c, c);
  t.row_selectivity.assign(c, 0.0);
  for (std::size_t i = 0; i < c; ++i) {
    const double intra = block_sums(i, i);
    if (!(intra > 0.0))
      throw Error(ErrorCode::DegenerateSelectivity, "class " + std::to_string(i) + " has zero intraclass sum");
    double smallest = INFINITY;
    for (std::size_t j = 0; j < c; ++j) {
      t.ratios(i, j) = i == j ? 1.0 : block_sums(i, j) / intra;
      if (i != j) smallest = std::min(smallest, t.ratios(i, j));
    }
    t.row_selectivity[i] = smallest;
  }
  t.average = std::accumulate(t.row_selectivity.begin(), t.row_selectivity.end(), 0.0) / static_cast<double>(c);
  return t;
}

FisherScores fisher_score(std::span<const Vector> features, std::span<const std::int32_t> labels) {
  if (features.size() != labels.size()) throw Error(ErrorCode::InvalidDimension, "feature and label counts differ");
  if (features.empty()) throw Error(ErrorCode::EmptyInput, "no samples");
  const std::size_t dim = features.front().size();
  std::map<std::int32_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (features[i].size() != dim) throw Error(ErrorCode::InvalidDimension, "feature dimensions differ");
    groups[labels[i]].push_back(i);
  }
  if (groups.size() < 2) throw Error(ErrorCode::SingleClass, "Fisher score needs two classes");

  struct Moments {
    double n;
    Vector mean, var;
  };
  std::vector<Moments> per_class;
  for (const auto& [label, idx] : groups) {
    Moments m{static_cast<double>(idx.size()), Vector(dim, 0.0), Vector(dim, 0.0)};
    for (std::size_t i : idx)
      for (std::size_t j = 0; j < dim; ++j) m.mean[j] += features[i][j];
    for (double& v : m.mean) v /= m.n;
    for (std::size_t i : idx)
      for (std::size_t j = 0; j < dim; ++j) m.var[j] += (features[i][j] - m.mean[j]) * (features[i][j] - m.mean[j]);
    for (double& v : m.var) v /= m.n;
    per_class.push_back(std::move(m));
  }

  FisherScores out;
  out.per_dimension.assign(dim, 0.0);
  for (std::size_t j = 0; j < dim; ++j) {
    if (per_class.size() == 2) {
      const double diff = per_class[0].mean[j] - per_class[1].mean[j];
      out.per_dimension[j] = diff * diff / (per_class[0].var[j] + per_class[1].var[j] + kFisherEpsilon);
      continue;
    }
    double total = 0.0, n = 0.0;
    for (const auto& m : per_class) {
      total += m.n * m.mean[j];
      n += m.n;
    }
    const double grand = total / n;
    double between = 0.0, within = 0.0;
    for (const auto& m : per_class) {
      between += m.n * (m.mean[j] - grand) * (m.mean[j] - grand);
      within += m.n * m.var[j];
    }
    out.per_dimension[j] = between / (within + kFisherEpsilon);
  }
  out.mean = std::accumulate(out.per_dimension.begin(), out.per_dimension.end(), 0.0) / static_cast<double>(dim);
  return out;
}

}  // namespace sfa
