#pragma once

// Hot loops of the solver, each in two flavours: `serial` is the plain
// reference loop nest, `parallel` is the OpenMP version. Both accumulate every
// output entry over the same terms in the same order, so their results are
// bit-identical for any thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "sfa/linalg.hpp"

namespace sfa::kernels {

/// One plane rotation acting on indices (p, q): x_p' = c·x_p − s·x_q,
/// x_q' = s·x_p + c·x_q. Rotations handed to a kernel call touch disjoint
/// index pairs.
struct Rotation {
  std::size_t p;
  std::size_t q;
  double c;
  double s;
};

/// Which rows feed a Gram accumulation.
enum class GramSource {
  Centered,     // z(t) − shift
  Differences,  // z(t+1) − z(t), within each minisequence
};

namespace serial {

/// acc(i, j) += Σ v_i v_j for i ≤ j over every source row v, visiting
/// minisequences and time steps in order. Only the upper triangle is written.
void gram_upper(std::span<const linalg::Matrix> seqs, std::span<const double> shift,
                GramSource source, linalg::Matrix& acc);

void rotate_rows(linalg::Matrix& m, std::span<const Rotation> rotations);
void rotate_cols(linalg::Matrix& m, std::span<const Rotation> rotations);

linalg::Matrix multiply(const linalg::Matrix& a, const linalg::Matrix& b);
linalg::Matrix multiply_at_b(const linalg::Matrix& a, const linalg::Matrix& b);

}  // namespace serial

namespace parallel {

void gram_upper(std::span<const linalg::Matrix> seqs, std::span<const double> shift,
                GramSource source, linalg::Matrix& acc);

void rotate_rows(linalg::Matrix& m, std::span<const Rotation> rotations);
void rotate_cols(linalg::Matrix& m, std::span<const Rotation> rotations);

linalg::Matrix multiply(const linalg::Matrix& a, const linalg::Matrix& b);
linalg::Matrix multiply_at_b(const linalg::Matrix& a, const linalg::Matrix& b);

}  // namespace parallel

/// Threads available to the parallel kernels (1 when built without OpenMP).
int max_threads() noexcept;

}  // namespace sfa::kernels
