#include "sfa/sfa.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "sfa/error.hpp"

namespace sfa {

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::USFA: return "usfa";
    case Strategy::SSFA: return "ssfa";
    case Strategy::DSFA: return "dsfa";
    case Strategy::SDSFA: return "sdsfa";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::erase(lower, '-');
  for (Strategy s : {Strategy::USFA, Strategy::SSFA, Strategy::DSFA, Strategy::SDSFA})
    if (lower == to_string(s)) return s;
  throw Error(ErrorCode::ParseError, "unknown strategy '" + std::string(text) + "'");
}

ExpansionSpec ExpansionSpec::make(ExpansionKind kind, std::size_t input_dim) {
  ExpansionSpec spec{kind, input_dim, input_dim};
  if (kind == ExpansionKind::Quadratic) spec.output_dim = input_dim + input_dim * (input_dim + 1) / 2;
  return spec;
}

Vector quadratic_expand(std::span<const double> x) {
  const std::size_t n = x.size();
  Vector out;
  out.reserve(n + n * (n + 1) / 2);
  out.insert(out.end(), x.begin(), x.end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) out.push_back(x[i] * x[j]);
  return out;
}

Vector expand(const ExpansionSpec& spec, std::span<const double> x) {
  if (x.size() != spec.input_dim) throw Error(ErrorCode::InvalidDimension, "expansion input dimension mismatch");
  if (spec.kind == ExpansionKind::Quadratic) return quadratic_expand(x);
  return Vector(x.begin(), x.end());
}

std::size_t ModelBank::total_feature_count() const noexcept {
  std::size_t k = 0;
  for (const auto& m : models) k += m.feature_count();
  return k;
}

std::size_t ModelBank::model_index(std::int32_t class_label, std::int32_t region_label) const {
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& m = models[i];
    const bool class_ok = strategy == Strategy::USFA || m.class_label == class_label;
    const bool region_ok = strategy != Strategy::SDSFA || m.region_label == region_label;
    if (class_ok && region_ok) return i;
  }
  throw Error(ErrorCode::InvalidInput, "no model for class " + std::to_string(class_label) +
                                           ", region " + std::to_string(region_label));
}

double delta_value(std::span<const double> y) {
  if (y.size() < 2) throw Error(ErrorCode::TooShort, "delta value needs at least two samples");
  double s = 0.0;
  for (std::size_t t = 0; t + 1 < y.size(); ++t) {
    const double d = y[t + 1] - y[t];
    s += d * d;
  }
  return s / static_cast<double>(y.size() - 1);
}

Vector apply(const SlowFeatureModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim())
    throw Error(ErrorCode::InvalidDimension, "model expects input of dimension " +
                                                 std::to_string(model.input_dim()) + ", got " +
                                                 std::to_string(x.size()));
  Vector z = expand(model.expansion, model.pca.project(x));
  for (std::size_t i = 0; i < z.size(); ++i) z[i] -= model.h0[i];
  return linalg::multiply_transposed(model.w, z);
}

Matrix apply_sequence(const SlowFeatureModel& model, const Matrix& x) {
  Matrix y(x.rows(), model.feature_count());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    const Vector yt = apply(model, x.row(t));
    std::copy(yt.begin(), yt.end(), y.row(t).begin());
  }
  return y;
}

linalg::PcaModel fit_shared_pca(std::span<const Minisequence> data, std::size_t pca_dim) {
  if (data.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training minisequences");
  const std::size_t dim = data.front().data.cols();
  std::size_t rows = 0;
  for (const auto& m : data) {
    if (m.data.cols() != dim) throw Error(ErrorCode::InvalidDimension, "minisequence dimensions differ");
    rows += m.data.rows();
  }
  Matrix stacked(rows, dim);
  std::size_t r = 0;
  for (const auto& m : data)
    for (std::size_t t = 0; t < m.data.rows(); ++t, ++r)
      std::copy(m.data.row(t).begin(), m.data.row(t).end(), stacked.row(r).begin());
  return linalg::pca_fit(stacked, pca_dim);
}

std::vector<Matrix> expand_minisequences(const linalg::PcaModel& pca, const ExpansionSpec& spec,
                                         std::span<const Minisequence> data) {
  std::vector<Matrix> out;
  out.reserve(data.size());
  for (const auto& m : data) {
    Matrix z(m.data.rows(), spec.output_dim);
    for (std::size_t t = 0; t < m.data.rows(); ++t) {
      const Vector e = expand(spec, pca.project(m.data.row(t)));
      std::copy(e.begin(), e.end(), z.row(t).begin());
    }
    out.push_back(std::move(z));
  }
  return out;
}

namespace {

struct Prepared {
  linalg::PcaModel pca;
  ExpansionSpec spec;
  std::vector<Matrix> expanded;  // parallel to the input minisequences
};

Prepared prepare(std::span<const Minisequence> data, const FitOptions& options) {
  if (data.size() < 2) throw Error(ErrorCode::EmptyTrainingSet, "need at least two minisequences");
  if (options.k < 1) throw Error(ErrorCode::InvalidInput, "k must be at least 1");
  Prepared p;
  p.pca = fit_shared_pca(data, options.pca_dim);
  p.spec = ExpansionSpec::make(options.expansion, options.pca_dim);
  p.expanded = expand_minisequences(p.pca, p.spec, data);
  return p;
}

std::vector<Matrix> select(const std::vector<Matrix>& all, const std::vector<std::size_t>& idx) {
  std::vector<Matrix> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

void require_nonzero_derivatives(const Matrix& a, const Matrix& b, const std::string& what) {
  if (linalg::norm_inf(a) <= 1e-14 * linalg::norm_inf(b))
    throw Error(ErrorCode::InsufficientRank, what + ": training data is constant in time");
}

// Solves objective·W = constraint·W·Λ and keeps the k smallest eigenpairs.
SlowFeatureModel solve(const Prepared& p, const Matrix& objective, const Matrix& constraint, Vector h0,
                       const FitOptions& options, const std::string& what) {
  linalg::EigenResult eig = linalg::gen_eig_sym(objective, constraint, options.rel_cutoff);
  if (eig.eigenvalues.size() < options.k)
    throw Error(ErrorCode::InsufficientRank, what + ": requested " + std::to_string(options.k) +
                                                 " functions but only " +
                                                 std::to_string(eig.eigenvalues.size()) + " directions available");
  SlowFeatureModel m;
  m.pca = p.pca;
  m.expansion = p.spec;
  m.h0 = std::move(h0);
  m.w = Matrix(eig.eigenvectors.rows(), options.k);
  for (std::size_t r = 0; r < m.w.rows(); ++r)
    for (std::size_t c = 0; c < options.k; ++c) m.w(r, c) = eig.eigenvectors(r, c);
  m.eigenvalues.assign(eig.eigenvalues.begin(), eig.eigenvalues.begin() + static_cast<std::ptrdiff_t>(options.k));
  return m;
}

SlowFeatureModel fit_unsupervised(const Prepared& p, const std::vector<Matrix>& expanded,
                                  const FitOptions& options, const std::string& what) {
  linalg::Covariances cov = linalg::accumulate_covariances(expanded);
  if (cov.count_a == 0) throw Error(ErrorCode::InsufficientRank, what + ": no temporal differences");
  require_nonzero_derivatives(cov.a, cov.b, what);
  return solve(p, cov.a, cov.b, std::move(cov.mean), options, what);
}

std::map<std::int32_t, std::vector<std::size_t>> by_class(std::span<const Minisequence> data,
                                                          const std::vector<std::size_t>& subset) {
  std::map<std::int32_t, std::vector<std::size_t>> groups;
  for (std::size_t i : subset) {
    if (data[i].class_label < 0)
      throw Error(ErrorCode::InvalidInput, "supervised strategies need class-labelled minisequences");
    groups[data[i].class_label].push_back(i);
  }
  return groups;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

void require_class_sizes(const std::map<std::int32_t, std::vector<std::size_t>>& groups,
                         const std::string& cell_prefix) {
  for (const auto& [label, idx] : groups)
    if (idx.size() < 2)
      throw Error(ErrorCode::InsufficientClassData, cell_prefix + "class " + std::to_string(label) + " has " +
                                                        std::to_string(idx.size()) + " minisequences (need 2)");
}

// Discriminative fit for every class present in `subset`. `classes` lists the
// labels that must all be present.
std::vector<SlowFeatureModel> fit_discriminative(const Prepared& p, std::span<const Minisequence> data,
                                                 const std::vector<std::size_t>& subset,
                                                 const std::vector<std::int32_t>& classes,
                                                 const FitOptions& options, const std::string& cell_prefix) {
  if (options.gamma < 0.0) throw Error(ErrorCode::InvalidInput, "gamma must be nonnegative");
  auto groups = by_class(data, subset);
  for (std::int32_t c : classes)
    if (!groups.contains(c))
      throw Error(ErrorCode::InsufficientClassData, cell_prefix + "class " + std::to_string(c) + " is empty");
  require_class_sizes(groups, cell_prefix);
  if (groups.size() < 2)
    throw Error(ErrorCode::InsufficientClassData, cell_prefix + "discriminative fit needs two classes");

  const std::vector<Matrix> union_set = select(p.expanded, subset);
  const Vector h0 = linalg::pooled_mean(union_set);
  const Matrix b = linalg::centered_second_moment(union_set, h0);

  std::map<std::int32_t, Matrix> derivative;
  for (const auto& [label, idx] : groups) {
    std::size_t count = 0;
    derivative[label] = linalg::derivative_second_moment(select(p.expanded, idx), &count);
    if (count == 0)
      throw Error(ErrorCode::InsufficientClassData, cell_prefix + "class " + std::to_string(label) +
                                                        " has no temporal differences");
  }

  std::vector<SlowFeatureModel> models;
  const double other_weight = options.gamma / static_cast<double>(groups.size() - 1);
  for (const auto& [label, own] : derivative) {
    const std::string what = cell_prefix + "class " + std::to_string(label);
    require_nonzero_derivatives(own, b, what);
    Matrix e = own;
    for (const auto& [other, a_other] : derivative) {
      if (other == label) continue;
      for (std::size_t k = 0; k < e.data().size(); ++k) e.data()[k] -= other_weight * a_other.data()[k];
    }
    SlowFeatureModel m = solve(p, e, b, h0, options, what);
    m.strategy = Strategy::DSFA;
    m.class_label = label;
    m.gamma = options.gamma;
    models.push_back(std::move(m));
  }
  return models;
}

std::vector<std::int32_t> class_list(std::span<const Minisequence> data) {
  std::set<std::int32_t> labels;
  for (const auto& m : data) {
    if (m.class_label < 0)
      throw Error(ErrorCode::InvalidInput, "supervised strategies need class-labelled minisequences");
    labels.insert(m.class_label);
  }
  return {labels.begin(), labels.end()};
}

}  // namespace

ModelBank fit_usfa(std::span<const Minisequence> data, const FitOptions& options) {
  const Prepared p = prepare(data, options);
  ModelBank bank;
  bank.strategy = Strategy::USFA;
  bank.models.push_back(fit_unsupervised(p, p.expanded, options, "usfa"));
  bank.models.back().strategy = Strategy::USFA;
  return bank;
}

ModelBank fit_ssfa(std::span<const Minisequence> data, const FitOptions& options) {
  const Prepared p = prepare(data, options);
  const auto groups = by_class(data, all_indices(data.size()));
  require_class_sizes(groups, "");
  ModelBank bank;
  bank.strategy = Strategy::SSFA;
  for (const auto& [label, idx] : groups) {
    SlowFeatureModel m = fit_unsupervised(p, select(p.expanded, idx), options, "class " + std::to_string(label));
    m.strategy = Strategy::SSFA;
    m.class_label = label;
    bank.classes.push_back(label);
    bank.models.push_back(std::move(m));
  }
  return bank;
}

ModelBank fit_dsfa(std::span<const Minisequence> data, const FitOptions& options) {
  const auto classes = class_list(data);
  const Prepared p = prepare(data, options);
  ModelBank bank;
  bank.strategy = Strategy::DSFA;
  bank.classes = classes;
  bank.models = fit_discriminative(p, data, all_indices(data.size()), classes, options, "");
  return bank;
}

ModelBank fit_sdsfa(std::span<const Minisequence> data, const FitOptions& options) {
  const std::size_t cells = options.grid.cells();
  if (cells == 0) throw Error(ErrorCode::InvalidInput, "grid must have at least one cell");
  std::vector<std::vector<std::size_t>> regions(cells);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = data[i].region_label;
    if (r < 0 || static_cast<std::size_t>(r) >= cells)
      throw Error(ErrorCode::InvalidInput, "minisequence " + std::to_string(i) + " has region label " +
                                               std::to_string(r) + " outside the grid");
    regions[static_cast<std::size_t>(r)].push_back(i);
  }
  const auto classes = class_list(data);
  const Prepared p = prepare(data, options);
  ModelBank bank;
  bank.strategy = Strategy::SDSFA;
  bank.grid = options.grid;
  bank.classes = classes;
  for (std::size_t r = 0; r < cells; ++r) {
    auto models = fit_discriminative(p, data, regions[r], classes, options,
                                     "region " + std::to_string(r) + ", ");
    for (auto& m : models) {
      m.strategy = Strategy::SDSFA;
      m.region_label = static_cast<std::int32_t>(r);
      bank.models.push_back(std::move(m));
    }
  }
  return bank;
}

ModelBank fit(Strategy strategy, std::span<const Minisequence> data, const FitOptions& options) {
  switch (strategy) {
    case Strategy::USFA: return fit_usfa(data, options);
    case Strategy::SSFA: return fit_ssfa(data, options);
    case Strategy::DSFA: return fit_dsfa(data, options);
    case Strategy::SDSFA: return fit_sdsfa(data, options);
  }
  throw Error(ErrorCode::InvalidInput, "unknown strategy");
}

ConstraintReport check_constraints(const SlowFeatureModel& model, std::span<const Minisequence> data) {
  const std::size_t k = model.feature_count();
  Vector sum(k, 0.0);
  Matrix outer(k, k);
  std::size_t n = 0;
  for (const auto& m : data) {
    const Matrix y = apply_sequence(model, m.data);
    for (std::size_t t = 0; t < y.rows(); ++t) {
      auto row = y.row(t);
      for (std::size_t i = 0; i < k; ++i) {
        sum[i] += row[i];
        for (std::size_t j = i; j < k; ++j) outer(i, j) += row[i] * row[j];
      }
    }
    n += y.rows();
  }
  if (n == 0) throw Error(ErrorCode::EmptyInput, "no samples to check constraints on");
  ConstraintReport report;
  const double inv = 1.0 / static_cast<double>(n);
  Vector mean(k), var(k);
  for (std::size_t i = 0; i < k; ++i) {
    mean[i] = sum[i] * inv;
    var[i] = outer(i, i) * inv - mean[i] * mean[i];
    report.max_abs_mean = std::max(report.max_abs_mean, std::abs(mean[i]));
    report.max_variance_error = std::max(report.max_variance_error, std::abs(var[i] - 1.0));
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double cov = outer(i, j) * inv - mean[i] * mean[j];
      report.max_abs_correlation =
          std::max(report.max_abs_correlation, std::abs(cov / std::sqrt(var[i] * var[j])));
    }
  return report;
}

std::vector<Minisequence> constraint_set(const ModelBank& bank, std::size_t model_index,
                                         std::span<const Minisequence> data) {
  const SlowFeatureModel& model = bank.models.at(model_index);
  std::vector<Minisequence> out;
  for (const auto& m : data) {
    bool keep = true;
    if (bank.strategy == Strategy::SSFA) keep = m.class_label == model.class_label;
    if (bank.strategy == Strategy::SDSFA) keep = m.region_label == model.region_label;
    if (keep) out.push_back(m);
  }
  return out;
}

}  // namespace sfa
