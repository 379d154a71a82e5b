#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles/oracles.hpp"
#include "support.hpp"
#include "sfa/error.hpp"
#include "sfa/linalg.hpp"

using namespace sfa;
using namespace sfa::linalg;
using testing::code_of;

namespace {

Matrix reconstruct(const EigenResult& r) {
  const std::size_t n = r.eigenvectors.rows();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < r.eigenvalues.size(); ++k)
        out(i, j) += r.eigenvectors(i, k) * r.eigenvalues[k] * r.eigenvectors(j, k);
  return out;
}

}  // namespace

TEST_CASE("the bisection oracle reproduces analytic 2x2 eigenvalues") {
  // [[a, b], [b, c]]: (a+c)/2 ± sqrt(((a−c)/2)² + b²)
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const double a = standard_normal(rng), b = standard_normal(rng), c = standard_normal(rng);
    const double mid = 0.5 * (a + c), r = std::hypot(0.5 * (a - c), b);
    const auto ev = oracle::symmetric_eigenvalues(Matrix{{a, b}, {b, c}});
    CHECK(ev[0] == doctest::Approx(mid - r).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx(mid + r).epsilon(1e-12));
  }
}

TEST_CASE("sym_eig on a diagonal matrix returns sorted values and unit axes") {
  const auto r = sym_eig(Matrix{{3, 0, 0}, {0, 1, 0}, {0, 0, 2}});
  CHECK(r.eigenvalues == Vector{1, 2, 3});
  CHECK(r.eigenvectors == Matrix{{0, 0, 1}, {1, 0, 0}, {0, 1, 0}});
}

TEST_CASE("sym_eig on [[2,1],[1,2]]") {
  const auto r = sym_eig(Matrix{{2, 1}, {1, 2}});
  CHECK(r.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.eigenvalues[1] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("sym_eig matches the Householder-Sturm oracle on random 8x8 matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = oracle::random_symmetric(8, rng);
    const auto r = sym_eig(m);
    const auto ref = oracle::symmetric_eigenvalues(m);
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(r.eigenvalues[i] - ref[i]) < 1e-8);
  }
}

TEST_CASE("sym_eig residual, reconstruction and orthonormality up to 32x32") {
  std::mt19937_64 rng(12);
  for (std::size_t n : {1u, 2u, 5u, 17u, 32u}) {
    const Matrix m = oracle::random_symmetric(n, rng);
    const auto r = sym_eig(m);
    const double scale = norm_inf(m);
    CHECK(max_abs_diff(reconstruct(r), m) < 1e-8 * scale);
    const Matrix mv = multiply(m, r.eigenvectors);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(mv(i, j) - r.eigenvectors(i, j) * r.eigenvalues[j]) < 1e-8 * scale);
    CHECK(max_abs_diff(multiply_at_b(r.eigenvectors, r.eigenvectors), Matrix::identity(n)) < 1e-12);
    CHECK(std::is_sorted(r.eigenvalues.begin(), r.eigenvalues.end()));
  }
}

TEST_CASE("sym_eig sign convention: largest-magnitude entry of each vector is positive") {
  std::mt19937_64 rng(13);
  const auto r = sym_eig(oracle::random_symmetric(6, rng));
  for (std::size_t j = 0; j < 6; ++j) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < 6; ++i)
      if (std::abs(r.eigenvectors(i, j)) > std::abs(r.eigenvectors(arg, j))) arg = i;
    CHECK(r.eigenvectors(arg, j) > 0.0);
  }
}

TEST_CASE("sym_eig rejects invalid matrices") {
  CHECK(code_of([] { sym_eig(Matrix(2, 3)); }) == ErrorCode::InvalidMatrix);
  CHECK(code_of([] { sym_eig(Matrix{{1, 2}, {0, 1}}); }) == ErrorCode::InvalidMatrix);
  CHECK(code_of([] { sym_eig(Matrix{{1, NAN}, {NAN, 1}}); }) == ErrorCode::InvalidMatrix);
}

TEST_CASE("gen_eig_sym identity and diagonal cases") {
  const auto r = gen_eig_sym(Matrix::identity(3), Matrix::identity(3));
  for (double v : r.eigenvalues) CHECK(v == doctest::Approx(1.0));
  const auto d = gen_eig_sym(Matrix{{2, 0}, {0, 1}}, Matrix::identity(2));
  CHECK(d.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(d.eigenvalues[1] == doctest::Approx(2.0));
  CHECK(std::abs(d.eigenvectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(d.eigenvectors(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("gen_eig_sym matches the explicit-inverse oracle and is b-orthonormal") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const Matrix a = oracle::random_symmetric(n, rng);
    const Matrix b = oracle::random_spd(n, rng);
    const auto r = gen_eig_sym(a, b);
    const auto ref = oracle::generalized_eigenvalues(a, b);
    REQUIRE(r.eigenvalues.size() == n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(r.eigenvalues[i] - ref[i]) < 1e-8);
    const Matrix gram = multiply_at_b(r.eigenvectors, multiply(b, r.eigenvectors));
    CHECK(max_abs_diff(gram, Matrix::identity(n)) < 1e-7);
    Matrix bwl = multiply(b, r.eigenvectors);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) bwl(i, j) *= r.eigenvalues[j];
    CHECK(max_abs_diff(multiply(a, r.eigenvectors), bwl) < 1e-7 * (norm_inf(a) + norm_inf(b)));
  }
}

TEST_CASE("gen_eig_sym drops null directions of b and reports errors") {
  const Matrix b{{1, 0, 0}, {0, 1, 0}, {0, 0, 0}};
  const auto r = gen_eig_sym(Matrix::identity(3), b);
  CHECK(r.eigenvalues.size() == 2);
  CHECK(code_of([] { gen_eig_sym(Matrix::identity(2), Matrix{{1, 0}, {0, -1}}); }) == ErrorCode::NotPSD);
  CHECK(code_of([] { gen_eig_sym(Matrix::identity(2), Matrix(2, 2)); }) == ErrorCode::DegenerateCovariance);
}

TEST_CASE("pca_fit: exact line, isotropic data, and the covariance oracle") {
  Matrix line(20, 2);
  for (std::size_t i = 0; i < 20; ++i) {
    line(i, 0) = double(i);
    line(i, 1) = 2.0 * double(i) + 1.0;
  }
  const auto pl = pca_fit(line, 1);
  for (std::size_t i = 0; i < 20; ++i) {
    const double c = pl.project(line.row(i))[0];
    for (std::size_t j = 0; j < 2; ++j) CHECK(pl.mean[j] + c * pl.projection(0, j) == doctest::Approx(line(i, j)));
  }

  std::mt19937_64 rng(31);
  const Matrix data = oracle::random_matrix(100, 10, rng);
  const auto p = pca_fit(data, 4);
  CHECK(max_abs_diff(multiply(p.projection, p.projection.transposed()), Matrix::identity(4)) < 1e-8);
  Matrix cov(10, 10);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) {
      for (std::size_t t = 0; t < 100; ++t) cov(i, j) += (data(t, i) - p.mean[i]) * (data(t, j) - p.mean[j]);
      cov(i, j) /= 99.0;
    }
  const auto ref = oracle::symmetric_eigenvalues(cov);
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(p.explained_eigenvalues[k] - ref[9 - k]) < 1e-8);

  const auto full = pca_fit(data, 10);
  double total = 0.0, kept = 0.0;
  for (std::size_t i = 0; i < 10; ++i) total += cov(i, i);
  for (double v : full.explained_eigenvalues) kept += v;
  CHECK(std::abs(total - kept) < 1e-8);

  CHECK(code_of([&] { pca_fit(data, 11); }) == ErrorCode::InvalidDimension);
  CHECK(code_of([&] { pca_fit(data, 0); }) == ErrorCode::InvalidDimension);
  CHECK(code_of([] { pca_fit(Matrix(1, 3), 1); }) == ErrorCode::EmptyTrainingSet);
}

TEST_CASE("accumulate_covariances hand example and empty input") {
  const std::vector<Matrix> seqs{Matrix{{0}, {2}}, Matrix{{0}, {-2}}};
  const auto c = accumulate_covariances(seqs);
  CHECK(c.a(0, 0) == 4.0);
  CHECK(c.count_a == 2);
  CHECK(c.count_b == 4);
  CHECK(c.b(0, 0) == 2.0);  // mean 0, values {0, 4, 0, 4}
  const std::vector<Matrix> constant{Matrix{{1, 2}, {1, 2}, {1, 2}}};
  CHECK(accumulate_covariances(constant).a == Matrix(2, 2));
  CHECK(code_of([] { accumulate_covariances({}); }) == ErrorCode::EmptyTrainingSet);
}

TEST_CASE("accumulate_covariances matches the naive oracle, is symmetric and PSD") {
  std::mt19937_64 rng(41);
  std::vector<Matrix> seqs;
  for (int i = 0; i < 50; ++i) seqs.push_back(oracle::random_matrix(2 + uniform_below(rng, 6), 6, rng));
  const auto c = accumulate_covariances(seqs);
  const auto ref = oracle::covariances(seqs);
  CHECK(oracle::max_abs(c.b, ref.b) < 1e-10);
  CHECK(oracle::max_abs(c.a, ref.a) < 1e-10);
  CHECK(max_asymmetry(c.a) == 0.0);
  CHECK(max_asymmetry(c.b) == 0.0);
  for (double v : oracle::symmetric_eigenvalues(c.b)) CHECK(v > -1e-10);
}
