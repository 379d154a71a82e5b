// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sfa/kernels.hpp"
#include "sfa/rng.hpp"

namespace {

using sfa::linalg::Matrix;
namespace kernels = sfa::kernels;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = sfa::standard_normal(rng);
  return m;
}

// Quadratic expansion of a 50-dim PCA output: 1325 columns, 5-step minisequences.
std::vector<Matrix> expanded_minisequences(std::size_t count, std::size_t dim) {
  std::mt19937_64 rng(1);
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_matrix(5, dim, rng));
  return out;
}

std::vector<kernels::Rotation> sweep_round(std::size_t n) {
  std::vector<kernels::Rotation> out;
  for (std::size_t p = 0; p + 1 < n; p += 2) out.push_back({p, p + 1, 0.8, 0.6});
  return out;
}

template <auto Gram>
void BM_GramUpper(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto seqs = expanded_minisequences(200, dim);
  const std::vector<double> shift(dim, 0.0);
  for (auto _ : state) {
    Matrix acc(dim, dim);
    Gram(seqs, shift, kernels::GramSource::Centered, acc);
    benchmark::DoNotOptimize(acc.data().data());
  }
}

template <auto Rotate>
void BM_Rotate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  Matrix m = random_matrix(n, n, rng);
  const auto rotations = sweep_round(n);
  for (auto _ : state) {
    Rotate(m, rotations);
    benchmark::DoNotOptimize(m.data().data());
  }
}

template <auto Multiply>
void BM_Multiply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  const Matrix a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(Multiply(a, b));
}

}  // namespace

BENCHMARK(BM_GramUpper<kernels::serial::gram_upper>)->Name("gram_upper/serial")->Arg(230)->Arg(1325);
BENCHMARK(BM_GramUpper<kernels::parallel::gram_upper>)->Name("gram_upper/parallel")->Arg(230)->Arg(1325);
BENCHMARK(BM_Rotate<kernels::serial::rotate_rows>)->Name("rotate_rows/serial")->Arg(512)->Arg(1325);
BENCHMARK(BM_Rotate<kernels::parallel::rotate_rows>)->Name("rotate_rows/parallel")->Arg(512)->Arg(1325);
BENCHMARK(BM_Rotate<kernels::serial::rotate_cols>)->Name("rotate_cols/serial")->Arg(512)->Arg(1325);
BENCHMARK(BM_Rotate<kernels::parallel::rotate_cols>)->Name("rotate_cols/parallel")->Arg(512)->Arg(1325);
BENCHMARK(BM_Multiply<kernels::serial::multiply>)->Name("multiply/serial")->Arg(256)->Arg(512);
BENCHMARK(BM_Multiply<kernels::parallel::multiply>)->Name("multiply/parallel")->Arg(256)->Arg(512);

BENCHMARK_MAIN();
