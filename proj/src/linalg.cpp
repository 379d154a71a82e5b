#include "sfa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sfa/error.hpp"
#include "sfa/kernels.hpp"

namespace sfa::linalg {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw Error(ErrorCode::InvalidMatrix, "entry count does not match shape");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorCode::InvalidMatrix, "ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Vector Matrix::column(std::size_t c) const {
  Vector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::InvalidDimension, "multiply shape mismatch");
  return kernels::parallel::multiply(a, b);
}

Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::InvalidDimension, "multiply shape mismatch");
  return kernels::parallel::multiply_at_b(a, b);
}

Vector multiply(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw Error(ErrorCode::InvalidDimension, "matrix-vector shape mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vector multiply_transposed(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw Error(ErrorCode::InvalidDimension, "matrix-vector shape mismatch");
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    const double xi = x[i];
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += r[j] * xi;
  }
  return y;
}

double norm_inf(const Matrix& m) noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

double norm_frobenius(const Matrix& m) noexcept {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::InvalidDimension, "shape mismatch");
  double d = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    d = std::max(d, std::abs(a.data()[k] - b.data()[k]));
  return d;
}

double max_asymmetry(const Matrix& m) noexcept {
  double d = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) d = std::max(d, std::abs(m(i, j) - m(j, i)));
  return d;
}

void require_symmetric(const Matrix& m, const char* what) {
  if (!m.square() || m.empty())
    throw Error(ErrorCode::InvalidMatrix, std::string(what) + " must be square and non-empty");
  double scale = 0.0;
  for (double v : m.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidMatrix, std::string(what) + " has non-finite entries");
    scale = std::max(scale, std::abs(v));
  }
  if (max_asymmetry(m) > 1e-10 * scale)
    throw Error(ErrorCode::InvalidMatrix, std::string(what) + " is not symmetric");
}

void canonicalize_signs(Matrix& columns) {
  for (std::size_t c = 0; c < columns.cols(); ++c) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t r = 0; r < columns.rows(); ++r) {
      const double v = std::abs(columns(r, c));
      if (v > best) {
        best = v;
        arg = r;
      }
    }
    if (columns.rows() > 0 && columns(arg, c) < 0.0)
      for (std::size_t r = 0; r < columns.rows(); ++r) columns(r, c) = -columns(r, c);
  }
}

namespace {

double off_diagonal_norm(const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j) s += m(i, j) * m(i, j);
  return std::sqrt(s);
}

// Rotation (c, s) with s = t·c that annihilates m(p, q).
kernels::Rotation annihilator(const Matrix& m, std::size_t p, std::size_t q) {
  const double apq = m(p, q);
  if (apq == 0.0) return {p, q, 1.0, 0.0};
  const double tau = (m(q, q) - m(p, p)) / (2.0 * apq);
  const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  return {p, q, c, t * c};
}

// Sorts eigenpairs ascending and fixes signs.
EigenResult sorted_pairs(const Vector& values, const Matrix& vectors) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  EigenResult out;
  out.eigenvalues.resize(values.size());
  out.eigenvectors = Matrix(vectors.rows(), order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.eigenvalues[k] = values[order[k]];
    for (std::size_t r = 0; r < vectors.rows(); ++r) out.eigenvectors(r, k) = vectors(r, order[k]);
  }
  canonicalize_signs(out.eigenvectors);
  return out;
}

}  // namespace

EigenResult sym_eig(const Matrix& m) {
  require_symmetric(m, "sym_eig input");
  const std::size_t n = m.rows();
  Matrix a = m;
  Matrix v = Matrix::identity(n);

  const double tol = 1e-12 * norm_frobenius(m);
  // Round-robin ordering: each round is a set of disjoint (p, q) pairs whose
  // rotations are applied together. A dummy index pads odd sizes.
  const std::size_t players = n + (n % 2);
  std::vector<std::size_t> ring(players);
  std::iota(ring.begin(), ring.end(), std::size_t{0});
  std::vector<kernels::Rotation> rotations;
  rotations.reserve(players / 2);

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && n > 1; ++sweep) {
    if (off_diagonal_norm(a) <= tol) break;
    for (std::size_t round = 0; round + 1 < players; ++round) {
      rotations.clear();
      for (std::size_t k = 0; k < players / 2; ++k) {
        std::size_t p = ring[k];
        std::size_t q = ring[players - 1 - k];
        if (p >= n || q >= n) continue;
        if (p > q) std::swap(p, q);
        const auto rot = annihilator(a, p, q);
        if (rot.s != 0.0) rotations.push_back(rot);
      }
      if (!rotations.empty()) {
        kernels::parallel::rotate_rows(a, rotations);
        kernels::parallel::rotate_cols(a, rotations);
        kernels::parallel::rotate_cols(v, rotations);
        for (const auto& r : rotations) a(r.p, r.q) = a(r.q, r.p) = 0.0;
      }
      std::rotate(ring.begin() + 1, ring.end() - 1, ring.end());
    }
  }

  Vector values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
  return sorted_pairs(values, v);
}

EigenResult gen_eig_sym(const Matrix& a, const Matrix& b, double rel_cutoff) {
  require_symmetric(a, "gen_eig_sym a");
  require_symmetric(b, "gen_eig_sym b");
  if (a.rows() != b.rows()) throw Error(ErrorCode::InvalidMatrix, "a and b differ in size");
  const std::size_t n = a.rows();

  const EigenResult bd = sym_eig(b);
  const double dmax = bd.eigenvalues.back();
  const double dabs = std::max(std::abs(dmax), std::abs(bd.eigenvalues.front()));
  constexpr double kPsdTolerance = 1e-8;
  if (bd.eigenvalues.front() < -kPsdTolerance * dabs)
    throw Error(ErrorCode::NotPSD, "b has eigenvalue " + std::to_string(bd.eigenvalues.front()));
  if (!(dmax > 0.0)) throw Error(ErrorCode::DegenerateCovariance, "b is zero");

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i)
    if (bd.eigenvalues[i] > rel_cutoff * dmax) kept.push_back(i);
  if (kept.empty()) throw Error(ErrorCode::DegenerateCovariance, "every direction of b discarded");

  Matrix whitening(n, kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const double scale = 1.0 / std::sqrt(bd.eigenvalues[kept[k]]);
    for (std::size_t r = 0; r < n; ++r) whitening(r, k) = bd.eigenvectors(r, kept[k]) * scale;
  }

  Matrix reduced = multiply_at_b(whitening, multiply(a, whitening));
  for (std::size_t i = 0; i < reduced.rows(); ++i)
    for (std::size_t j = i + 1; j < reduced.cols(); ++j)
      reduced(i, j) = reduced(j, i) = 0.5 * (reduced(i, j) + reduced(j, i));

  EigenResult inner = sym_eig(reduced);
  EigenResult out;
  out.eigenvalues = std::move(inner.eigenvalues);
  out.eigenvectors = multiply(whitening, inner.eigenvectors);
  canonicalize_signs(out.eigenvectors);
  return out;
}

Vector PcaModel::project(std::span<const double> x) const {
  if (x.size() != in_dim()) throw Error(ErrorCode::InvalidDimension, "PCA input dimension mismatch");
  Vector out(out_dim(), 0.0);
  for (std::size_t i = 0; i < out_dim(); ++i) {
    auto r = projection.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += r[j] * (x[j] - mean[j]);
    out[i] = s;
  }
  return out;
}

PcaModel pca_fit(const Matrix& data, std::size_t out_dim) {
  if (data.rows() < 2) throw Error(ErrorCode::EmptyTrainingSet, "PCA needs at least two samples");
  if (out_dim < 1 || out_dim > data.cols())
    throw Error(ErrorCode::InvalidDimension, "PCA output dimension " + std::to_string(out_dim) +
                                                 " not in [1, " + std::to_string(data.cols()) + "]");
  const std::span<const Matrix> one(&data, 1);
  PcaModel model;
  model.mean = pooled_mean(one);
  Matrix cov(data.cols(), data.cols());
  kernels::parallel::gram_upper(one, model.mean, kernels::GramSource::Centered, cov);
  const double scale = 1.0 / static_cast<double>(data.rows() - 1);
  for (std::size_t i = 0; i < cov.rows(); ++i)
    for (std::size_t j = i; j < cov.cols(); ++j) cov(j, i) = cov(i, j) = cov(i, j) * scale;

  const EigenResult eig = sym_eig(cov);
  const std::size_t n = data.cols();
  model.projection = Matrix(out_dim, n);
  model.explained_eigenvalues.resize(out_dim);
  for (std::size_t k = 0; k < out_dim; ++k) {
    const std::size_t src = n - 1 - k;
    model.explained_eigenvalues[k] = eig.eigenvalues[src];
    for (std::size_t j = 0; j < n; ++j) model.projection(k, j) = eig.eigenvectors(j, src);
  }
  return model;
}

Vector pooled_mean(std::span<const Matrix> minisequences) {
  if (minisequences.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no minisequences");
  const std::size_t dim = minisequences.front().cols();
  Vector mean(dim, 0.0);
  std::size_t count = 0;
  for (const Matrix& s : minisequences) {
    if (s.cols() != dim) throw Error(ErrorCode::InvalidDimension, "minisequence dimensions differ");
    for (std::size_t t = 0; t < s.rows(); ++t) {
      auto r = s.row(t);
      for (std::size_t j = 0; j < dim; ++j) mean[j] += r[j];
    }
    count += s.rows();
  }
  if (count == 0) throw Error(ErrorCode::EmptyTrainingSet, "minisequences hold no samples");
  for (double& m : mean) m /= static_cast<double>(count);
  return mean;
}

namespace {

void symmetrize_scaled(Matrix& m, std::size_t count) {
  const double scale = count == 0 ? 0.0 : 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j) m(j, i) = m(i, j) = m(i, j) * scale;
}

}  // namespace

Matrix centered_second_moment(std::span<const Matrix> minisequences, std::span<const double> mean,
                              std::size_t* count) {
  const std::size_t dim = mean.size();
  std::size_t n = 0;
  for (const Matrix& s : minisequences) {
    if (s.cols() != dim) throw Error(ErrorCode::InvalidDimension, "minisequence dimensions differ");
    n += s.rows();
  }
  Matrix m(dim, dim);
  kernels::parallel::gram_upper(minisequences, mean, kernels::GramSource::Centered, m);
  symmetrize_scaled(m, n);
  if (count) *count = n;
  return m;
}

Matrix derivative_second_moment(std::span<const Matrix> minisequences, std::size_t* count) {
  if (minisequences.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no minisequences");
  const std::size_t dim = minisequences.front().cols();
  std::size_t n = 0;
  for (const Matrix& s : minisequences) {
    if (s.cols() != dim) throw Error(ErrorCode::InvalidDimension, "minisequence dimensions differ");
    if (s.rows() >= 2) n += s.rows() - 1;
  }
  Matrix m(dim, dim);
  kernels::parallel::gram_upper(minisequences, {}, kernels::GramSource::Differences, m);
  symmetrize_scaled(m, n);
  if (count) *count = n;
  return m;
}

Covariances accumulate_covariances(std::span<const Matrix> minisequences) {
  Covariances out;
  out.mean = pooled_mean(minisequences);
  out.b = centered_second_moment(minisequences, out.mean, &out.count_b);
  out.a = derivative_second_moment(minisequences, &out.count_a);
  return out;
}

}  // namespace sfa::linalg
