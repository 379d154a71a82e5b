#pragma once

// Dense symmetric linear algebra used by every slow-feature strategy:
// covariance accumulation, a Jacobi symmetric eigensolver, the whitened
// generalized eigensolver, and PCA.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sfa::linalg {

using Vector = std::vector<double>;

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  Vector column(std::size_t c) const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);
/// aᵀ·b without materializing the transpose.
Matrix multiply_at_b(const Matrix& a, const Matrix& b);
Vector multiply(const Matrix& a, std::span<const double> x);
/// aᵀ·x
Vector multiply_transposed(const Matrix& a, std::span<const double> x);

double norm_inf(const Matrix& m) noexcept;  // max absolute row sum
double norm_frobenius(const Matrix& m) noexcept;
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_asymmetry(const Matrix& m) noexcept;

/// Throws InvalidMatrix unless `m` is square, finite and symmetric to
/// 1e-10 relative to its largest entry.
void require_symmetric(const Matrix& m, const char* what);

struct EigenResult {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // column i pairs with eigenvalues[i]
};

/// Flips each column so that its largest-magnitude entry is positive.
void canonicalize_signs(Matrix& columns);

/// Cyclic Jacobi eigensolver for a symmetric matrix. Converges when the
/// off-diagonal Frobenius norm drops below 1e-12·‖m‖F (at most 100 sweeps).
EigenResult sym_eig(const Matrix& m);

inline constexpr double kDefaultRelCutoff = 1e-8;

/// Solves a·W = b·W·Λ by whitening b. Directions of b whose eigenvalue is
/// below rel_cutoff·max eigenvalue are discarded, so the result may hold
/// fewer than n pairs. Columns of W are b-orthonormal.
EigenResult gen_eig_sym(const Matrix& a, const Matrix& b, double rel_cutoff = kDefaultRelCutoff);

struct PcaModel {
  Vector mean;
  Matrix projection;  // out_dim × in_dim, orthonormal rows
  Vector explained_eigenvalues;

  std::size_t in_dim() const noexcept { return projection.cols(); }
  std::size_t out_dim() const noexcept { return projection.rows(); }
  Vector project(std::span<const double> x) const;

  friend bool operator==(const PcaModel&, const PcaModel&) = default;
};

/// PCA over row samples; projection rows are the leading eigenvectors of the
/// (N−1)-normalized sample covariance in descending eigenvalue order.
PcaModel pca_fit(const Matrix& data, std::size_t out_dim);

struct Covariances {
  Matrix b;  // ⟨z zᵀ⟩ over all time points, centered by `mean`
  Matrix a;  // ⟨ż żᵀ⟩ over within-minisequence forward differences
  std::size_t count_b = 0;
  std::size_t count_a = 0;
  Vector mean;
};

/// Each minisequence is a (time × dim) matrix. Differences never cross
/// minisequence boundaries; length-1 minisequences only contribute to b.
Covariances accumulate_covariances(std::span<const Matrix> minisequences);

/// Column mean over every row of every minisequence.
Vector pooled_mean(std::span<const Matrix> minisequences);

/// ⟨(z−mean)(z−mean)ᵀ⟩ over every row; returns the row count in `count`.
Matrix centered_second_moment(std::span<const Matrix> minisequences, std::span<const double> mean,
                              std::size_t* count = nullptr);

/// ⟨ż żᵀ⟩ over within-minisequence forward differences.
Matrix derivative_second_moment(std::span<const Matrix> minisequences, std::size_t* count = nullptr);

}  // namespace sfa::linalg
