#include "sfa/kernels.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sfa::kernels {

namespace {

using linalg::Matrix;

inline double source_value(const Matrix& seq, std::size_t t, std::size_t j,
                           std::span<const double> shift, GramSource source) {
  if (source == GramSource::Differences) return seq(t + 1, j) - seq(t, j);
  return seq(t, j) - shift[j];
}

inline std::size_t source_rows(const Matrix& seq, GramSource source) {
  if (source == GramSource::Differences) return seq.rows() < 2 ? 0 : seq.rows() - 1;
  return seq.rows();
}

// Accumulates output row i only. Shared by both flavours so that the order of
// the additions into acc(i, j) is fixed: minisequence, then time.
inline void gram_row(std::span<const Matrix> seqs, std::span<const double> shift,
                     GramSource source, Matrix& acc, std::size_t i, std::vector<double>& scratch) {
  const std::size_t dim = acc.cols();
  auto out = acc.row(i);
  for (const Matrix& seq : seqs) {
    const std::size_t n = source_rows(seq, source);
    for (std::size_t t = 0; t < n; ++t) {
      const double vi = source_value(seq, t, i, shift, source);
      if (vi == 0.0) {
        // adding 0·v_j is exact unless v_j is non-finite; inputs are finite
        continue;
      }
      for (std::size_t j = i; j < dim; ++j) scratch[j] = source_value(seq, t, j, shift, source);
      for (std::size_t j = i; j < dim; ++j) out[j] += vi * scratch[j];
    }
  }
}

inline void rotate_row_pair(Matrix& m, const Rotation& r) {
  auto rp = m.row(r.p);
  auto rq = m.row(r.q);
  for (std::size_t k = 0; k < m.cols(); ++k) {
    const double xp = rp[k];
    const double xq = rq[k];
    rp[k] = r.c * xp - r.s * xq;
    rq[k] = r.s * xp + r.c * xq;
  }
}

inline void rotate_cols_in_row(std::span<double> row, std::span<const Rotation> rotations) {
  for (const Rotation& r : rotations) {
    const double xp = row[r.p];
    const double xq = row[r.q];
    row[r.p] = r.c * xp - r.s * xq;
    row[r.q] = r.s * xp + r.c * xq;
  }
}

inline void multiply_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  auto dst = out.row(i);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double aik = a(i, k);
    auto src = b.row(k);
    for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * src[j];
  }
}

inline void multiply_at_b_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  auto dst = out.row(i);
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double aki = a(k, i);
    auto src = b.row(k);
    for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aki * src[j];
  }
}

}  // namespace

namespace serial {

void gram_upper(std::span<const Matrix> seqs, std::span<const double> shift, GramSource source,
                Matrix& acc) {
  const std::size_t dim = acc.cols();
  std::vector<double> v(dim);
  for (const Matrix& seq : seqs) {
    const std::size_t n = source_rows(seq, source);
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t j = 0; j < dim; ++j) v[j] = source_value(seq, t, j, shift, source);
      for (std::size_t i = 0; i < dim; ++i) {
        if (v[i] == 0.0) continue;
        for (std::size_t j = i; j < dim; ++j) acc(i, j) += v[i] * v[j];
      }
    }
  }
}

void rotate_rows(Matrix& m, std::span<const Rotation> rotations) {
  for (const Rotation& r : rotations) rotate_row_pair(m, r);
}

void rotate_cols(Matrix& m, std::span<const Rotation> rotations) {
  for (std::size_t k = 0; k < m.rows(); ++k) rotate_cols_in_row(m.row(k), rotations);
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) multiply_row(a, b, out, i);
  return out;
}

Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
  Matrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) multiply_at_b_row(a, b, out, i);
  return out;
}

}  // namespace serial

namespace parallel {

void gram_upper(std::span<const Matrix> seqs, std::span<const double> shift, GramSource source,
                Matrix& acc) {
  const auto dim = static_cast<std::int64_t>(acc.cols());
#pragma omp parallel
  {
    std::vector<double> scratch(acc.cols());
    // later rows are shorter; interleave them across threads
#pragma omp for schedule(static, 1)
    for (std::int64_t i = 0; i < dim; ++i)
      gram_row(seqs, shift, source, acc, static_cast<std::size_t>(i), scratch);
  }
}

void rotate_rows(Matrix& m, std::span<const Rotation> rotations) {
  const auto n = static_cast<std::int64_t>(rotations.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < n; ++r) rotate_row_pair(m, rotations[static_cast<std::size_t>(r)]);
}

void rotate_cols(Matrix& m, std::span<const Rotation> rotations) {
  const auto rows = static_cast<std::int64_t>(m.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < rows; ++k)
    rotate_cols_in_row(m.row(static_cast<std::size_t>(k)), rotations);
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  const auto rows = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) multiply_row(a, b, out, static_cast<std::size_t>(i));
  return out;
}

Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
  Matrix out(a.cols(), b.cols());
  const auto rows = static_cast<std::int64_t>(a.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i)
    multiply_at_b_row(a, b, out, static_cast<std::size_t>(i));
  return out;
}

}  // namespace parallel

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace sfa::kernels
