// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes. Tolerances and budgets are pinned below.

#include <Eigen/Dense>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sfa/dataio.hpp"
#include "sfa/error.hpp"
#include "sfa/pipeline.hpp"
#include "sfa/rng.hpp"

namespace {

using namespace sfa;
using linalg::Matrix;
using linalg::Vector;

constexpr double kMeanTol = 1e-6;
constexpr double kVarTol = 1e-4;
constexpr double kCorrTol = 1e-4;
constexpr double kEigTol = 1e-8;
constexpr double kResidualTol = 1e-7;
constexpr double kToyCorrelation = 0.95;
constexpr double kToySlowdown = 0.1;
constexpr double kLambdaDeltaTol = 1e-6;
constexpr double kAccuracyTarget = 0.90;
constexpr std::size_t kMinCuboids = 2000;
constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Desk-scale settings: paper defaults except for the cuboid and subspace
// sizes, which are shrunk to the 32×32 synthetic frames.
RunConfig benchmark_config(std::uint64_t seed) {
  RunConfig c;
  c.seed = seed;
  c.geometry = {8, 8, 7, 3};
  c.pca_dim = 10;
  c.k = 20;
  c.train_max_cuboids = 4000;
  c.synth_noise = 20.0;
  return c;
}

pipeline::Dataset benchmark(const RunConfig& c) {
  return pipeline::from_benchmark(synth::make_benchmark(c.seed, pipeline::benchmark_options(c)));
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

// --- 1 ---

Outcome constraint_suite() {
  RunConfig c = benchmark_config(1);
  const auto data = benchmark(c);
  const auto minis = pipeline::to_minisequences(pipeline::training_cuboids(data, c), c.geometry.delta_t);
  if (minis.size() < kMinCuboids) return {false, std::to_string(minis.size()) + " cuboids, need " + std::to_string(kMinCuboids)};
  ConstraintReport worst;
  std::size_t models = 0;
  bool ok = true;
  for (Strategy s : {Strategy::USFA, Strategy::SSFA, Strategy::DSFA, Strategy::SDSFA}) {
    const ModelBank bank = fit(s, minis, c.fit_options());
    for (std::size_t m = 0; m < bank.models.size(); ++m) {
      const auto r = check_constraints(bank.models[m], constraint_set(bank, m, minis));
      ok = ok && r.satisfied(kMeanTol, kVarTol, kCorrTol);
      worst.max_abs_mean = std::max(worst.max_abs_mean, r.max_abs_mean);
      worst.max_variance_error = std::max(worst.max_variance_error, r.max_variance_error);
      worst.max_abs_correlation = std::max(worst.max_abs_correlation, r.max_abs_correlation);
      ++models;
    }
  }
  return {ok, std::to_string(minis.size()) + " cuboids, " + std::to_string(models) + " models; worst " +
                  fmt("|mean| %.2e, |var-1| %.2e, |corr| %.2e", worst.max_abs_mean, worst.max_variance_error,
                      worst.max_abs_correlation)};
}

// --- 2 ---

// Gauss-Jordan with partial pivoting, written independently of the library.
Eigen::MatrixXd explicit_inverse(const Matrix& m) {
  const std::size_t n = m.rows();
  Eigen::MatrixXd aug(n, 2 * n);
  aug.setZero();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = 1.0;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(aug(r, col)) > std::abs(aug(pivot, col))) pivot = r;
    aug.row(col).swap(aug.row(pivot));
    aug.row(col) /= aug(col, col);
    for (std::size_t r = 0; r < n; ++r)
      if (r != col) aug.row(r) -= aug(r, col) * aug.row(col);
  }
  return aug.rightCols(n);
}

Outcome eigensolver_oracle() {
  std::mt19937_64 rng(2024);
  double worst_eig = 0.0, worst_res = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + uniform_below(rng, 8);
    Matrix a(n, n), m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = standard_normal(rng);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = standard_normal(rng);
    Matrix b = linalg::multiply_at_b(m, m);
    for (std::size_t i = 0; i < n; ++i) b(i, i) += 0.1;

    const auto res = linalg::gen_eig_sym(a, b);
    Eigen::MatrixXd ea(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) ea(i, j) = a(i, j);
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(explicit_inverse(b) * ea, false);
    std::vector<double> oracle;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) oracle.push_back(solver.eigenvalues()[i].real());
    std::sort(oracle.begin(), oracle.end());
    if (res.eigenvalues.size() != n) return {false, "trial " + std::to_string(trial) + ": eigenvalues missing"};
    for (std::size_t i = 0; i < n; ++i) worst_eig = std::max(worst_eig, std::abs(res.eigenvalues[i] - oracle[i]));

    const Matrix aw = linalg::multiply(a, res.eigenvectors);
    Matrix bwl = linalg::multiply(b, res.eigenvectors);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) bwl(i, j) *= res.eigenvalues[j];
    worst_res = std::max(worst_res, linalg::max_abs_diff(aw, bwl) / (linalg::norm_inf(a) + linalg::norm_inf(b)));
  }
  return {worst_eig < kEigTol && worst_res < kResidualTol,
          fmt("1000 pairs; max |eig - oracle| %.2e, max relative residual %.2e", worst_eig, worst_res)};
}

// --- 3, 4 ---

Outcome toy_recovery() {
  const auto r = pipeline::run_toy(2000, 7);
  const bool ok = r.correlation > kToyCorrelation && r.output_delta < kToySlowdown * r.min_input_delta;
  return {ok, fmt("|corr| %.6f, delta(y1) %.3e vs min input delta %.3e", r.correlation, r.output_delta,
                  r.min_input_delta)};
}

Outcome lambda_delta() {
  RunConfig c = benchmark_config(1);
  const auto data = benchmark(c);
  const auto minis = pipeline::to_minisequences(pipeline::training_cuboids(data, c), c.geometry.delta_t);
  const ModelBank bank = fit_usfa(minis, c.fit_options());
  const auto& model = bank.models.front();
  std::vector<double> sum(model.feature_count(), 0.0);
  std::size_t n = 0;
  for (const auto& m : minis) {
    const Matrix y = apply_sequence(model, m.data);
    for (std::size_t t = 0; t + 1 < y.rows(); ++t, ++n)
      for (std::size_t j = 0; j < y.cols(); ++j) {
        const double d = y(t + 1, j) - y(t, j);
        sum[j] += d * d;
      }
  }
  double worst = 0.0;
  bool ordered = true;
  for (std::size_t j = 0; j < sum.size(); ++j) {
    sum[j] /= double(n);
    worst = std::max(worst, std::abs(sum[j] - model.eigenvalues[j]));
    if (j > 0 && sum[j] < sum[j - 1]) ordered = false;
  }
  const auto toy = pipeline::run_toy(2000, 7);
  for (std::size_t j = 0; j < toy.eigenvalues.size(); ++j) {
    worst = std::max(worst, std::abs(toy.output_deltas[j] - toy.eigenvalues[j]));
    if (j > 0 && toy.output_deltas[j] < toy.output_deltas[j - 1]) ordered = false;
  }
  return {worst < kLambdaDeltaTol && ordered,
          fmt("benchmark (%.0f functions) and toy; max |delta - lambda| %.2e", double(sum.size()), worst) +
              (ordered ? ", deltas nondecreasing" : ", deltas out of order")};
}

// --- 5 ---

Outcome selectivity_ordering() {
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed : kSeeds) {
    RunConfig c = benchmark_config(seed);
    const auto data = benchmark(c);
    const auto cuboids = pipeline::training_cuboids(data, c);
    const auto minis = pipeline::to_minisequences(cuboids, c.geometry.delta_t);
    const ModelBank s = fit_ssfa(minis, c.fit_options());
    const ModelBank d = fit_dsfa(minis, c.fit_options());
    const double ss = selectivity_table(pipeline::selectivity_sums(cuboids, s)).average;
    const double ds = selectivity_table(pipeline::selectivity_sums(cuboids, d)).average;
    wins += ds > ss;
    detail += fmt(" %.2f/%.2f", ds, ss);
  }
  return {wins >= 4, std::to_string(wins) + "/5 seeds D > S (D/S:" + detail + ")"};
}

// --- 6, 7 ---

struct RunArtifacts {
  std::vector<std::uint8_t> bank, features, classifier;
  std::string report, results;
  double accuracy = 0.0, baseline = 0.0;
};

RunArtifacts full_run(std::uint64_t seed) {
  RunConfig c = benchmark_config(seed);
  c.baseline = true;
  const auto data = benchmark(c);
  const ModelBank bank = pipeline::train_bank(data, c);
  const auto features = pipeline::featurize(data, bank, c);
  const auto clf = pipeline::fit_classifier(features, bank, c);
  const auto ev = pipeline::evaluate(data, bank, features, clf, c);
  return {dataio::encode_bank(bank), dataio::encode_features(features), dataio::encode_classifier(clf),
          pipeline::format_report(ev), pipeline::format_results(ev), ev.sequence_accuracy,
          ev.baseline->sequence_accuracy};
}

RunArtifacts first_seed_run;

Outcome benchmark_accuracy() {
  double acc = 0.0, base = 0.0;
  std::string detail;
  for (std::uint64_t seed : kSeeds) {
    const RunArtifacts r = full_run(seed);
    if (seed == kSeeds[0]) first_seed_run = r;
    acc += r.accuracy;
    base += r.baseline;
    detail += fmt(" %.2f/%.2f", r.accuracy, r.baseline);
  }
  acc /= std::size(kSeeds);
  base /= std::size(kSeeds);
  return {acc >= kAccuracyTarget && acc > base,
          fmt("mean accuracy %.3f vs baseline %.3f", acc, base) + " (per seed D-SFA/baseline:" + detail + ")"};
}

Outcome determinism() {
  if (first_seed_run.report.empty()) first_seed_run = full_run(kSeeds[0]);
  const int threads = omp_get_max_threads();
  omp_set_num_threads(threads > 1 ? 1 : 2);
  const RunArtifacts again = full_run(kSeeds[0]);
  omp_set_num_threads(threads);
  const bool ok = again.bank == first_seed_run.bank && again.features == first_seed_run.features &&
                  again.classifier == first_seed_run.classifier && again.report == first_seed_run.report &&
                  again.results == first_seed_run.results;
  return {ok, std::string(ok ? "bank, features, classifier, report and results identical"
                             : "artifacts differ between runs") +
                  " across a rerun with a different thread count"};
}

// --- 8 ---

Outcome mirror_symmetry() {
  const Grid grid{2, 3};
  std::mt19937_64 rng(88);
  bool involution = true;
  for (int trial = 0; trial < 100; ++trial) {
    AsdFeature f;
    const std::size_t block = 1 + uniform_below(rng, 40);
    for (std::size_t i = 0; i < grid.cells() * block; ++i) f.values.push_back(uniform01(rng));
    involution = involution && mirror_feature(mirror_feature(f, grid, block), grid, block) == f;
  }
  std::size_t checked = 0, bad = 0;
  for (const BoundingBox box : {BoundingBox{5, 7, 80, 110}, BoundingBox{3, 2, 110, 80}})
    for (std::int64_t y = box.y; y < box.y + box.h; ++y)
      for (std::int64_t x = box.x; x < box.x + box.w; ++x) {
        const std::size_t r = region_label(x, y, box, grid);
        const std::size_t ix = r % grid.cols, iy = r / grid.cols;
        const std::size_t mirrored = region_label(mirror_x(x, box), y, box, grid);
        bad += mirrored != iy * grid.cols + (grid.cols - 1 - ix);
        ++checked;
      }
  return {involution && bad == 0, "100 involutions " + std::string(involution ? "exact" : "FAILED") + ", " +
                                      std::to_string(checked) + " positions checked, " + std::to_string(bad) +
                                      " asymmetric"};
}

// --- 9 ---

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = standard_normal(rng) * std::ldexp(1.0, int(uniform_below(rng, 40)) - 20);
  return m;
}

Vector random_vector(std::size_t n, std::mt19937_64& rng) {
  const Matrix m = random_matrix(1, n, rng);
  return {m.row(0).begin(), m.row(0).end()};
}

ModelBank random_bank(std::mt19937_64& rng) {
  ModelBank bank;
  bank.strategy = static_cast<Strategy>(uniform_below(rng, 4));
  bank.grid = {1 + uniform_below(rng, 3), 1 + uniform_below(rng, 3)};
  bank.geometry = {1 + uniform_below(rng, 5), 1 + uniform_below(rng, 5), 3 + uniform_below(rng, 5), 1};
  const std::size_t classes = bank.strategy == Strategy::USFA ? 1 : 2 + uniform_below(rng, 3);
  for (std::size_t c = 0; c < classes; ++c) bank.classes.push_back(static_cast<std::int32_t>(c * 3));
  const std::size_t cells = bank.strategy == Strategy::SDSFA ? bank.grid.cells() : 1;
  const std::size_t in = bank.geometry.raw_dim();
  const std::size_t p = 1 + uniform_below(rng, std::min<std::size_t>(in, 4));
  for (std::size_t r = 0; r < cells; ++r)
    for (std::size_t c = 0; c < (bank.strategy == Strategy::USFA ? 1 : classes); ++c) {
      SlowFeatureModel m;
      m.strategy = bank.strategy;
      m.pca.mean = random_vector(in, rng);
      m.pca.projection = random_matrix(p, in, rng);
      m.pca.explained_eigenvalues = random_vector(p, rng);
      m.expansion = ExpansionSpec::make(uniform_below(rng, 2) ? ExpansionKind::Quadratic : ExpansionKind::Identity, p);
      m.h0 = random_vector(m.expansion.output_dim, rng);
      const std::size_t k = 1 + uniform_below(rng, m.expansion.output_dim);
      m.w = random_matrix(m.expansion.output_dim, k, rng);
      m.eigenvalues = random_vector(k, rng);
      if (bank.strategy != Strategy::USFA) m.class_label = bank.classes[c];
      if (bank.strategy == Strategy::SDSFA) m.region_label = static_cast<std::int32_t>(r);
      if (bank.strategy == Strategy::DSFA || bank.strategy == Strategy::SDSFA) m.gamma = uniform01(rng);
      bank.models.push_back(std::move(m));
    }
  return bank;
}

Outcome format_round_trips() {
  std::mt19937_64 rng(99);
  std::size_t seq_ok = 0, bank_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    FrameSequence seq(1 + uniform_below(rng, 6), 1 + uniform_below(rng, 20), 1 + uniform_below(rng, 20));
    for (double& v : seq.pixels) v = static_cast<double>(uniform_below(rng, 256));
    const auto bytes = dataio::encode_sequence(seq);
    const FrameSequence back = dataio::decode_sequence(bytes);
    seq_ok += back.pixels == seq.pixels && back.frames == seq.frames && back.height == seq.height &&
              back.width == seq.width && dataio::encode_sequence(back) == bytes;

    const ModelBank bank = random_bank(rng);
    const auto bank_bytes = dataio::encode_bank(bank);
    const ModelBank bank_back = dataio::decode_bank(bank_bytes);
    bank_ok += bank_back == bank && dataio::encode_bank(bank_back) == bank_bytes;
  }
  return {seq_ok == 100 && bank_ok == 100,
          "SFV1 " + std::to_string(seq_ok) + "/100, model bank " + std::to_string(bank_ok) + "/100 bit-identical"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0: no runtime requirement
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "constraint suite", 60.0, constraint_suite},
      {2, "eigensolver oracle equivalence", 30.0, eigensolver_oracle},
      {3, "toy slow-latent recovery", 10.0, toy_recovery},
      {4, "ordering and lambda-delta identity", 0.0, lambda_delta},
      {5, "selectivity ordering", 0.0, selectivity_ordering},
      {6, "synthetic benchmark accuracy", 300.0, benchmark_accuracy},
      {7, "determinism", 0.0, determinism},
      {8, "mirror involution and region symmetry", 0.0, mirror_symmetry},
      {9, "format round trips", 0.0, format_round_trips},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && secs > c.budget_seconds) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_seconds);
    }
    failures += !o.pass;
    std::printf("[%s] %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
