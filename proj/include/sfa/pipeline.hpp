#pragma once

// End-to-end batch stages shared by the command-line driver and the
// acceptance suite: dataset I/O, training-cuboid harvesting, bank fitting,
// featurization, classifier training and evaluation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sfa/classify.hpp"
#include "sfa/config.hpp"
#include "sfa/dataio.hpp"
#include "sfa/synth.hpp"

namespace sfa::pipeline {

struct Dataset {
  std::vector<dataio::DatasetEntry> entries;
  std::vector<FrameSequence> sequences;

  std::size_t size() const noexcept { return entries.size(); }
};

Dataset load_dataset(const std::string& dir);
Dataset from_benchmark(const std::vector<synth::BenchmarkSample>& samples);
synth::BenchmarkOptions benchmark_options(const RunConfig& config);
/// Writes `<name>.sfv`, `<name>.ann` and the manifest into `dir`.
void write_benchmark(const std::string& dir, const std::vector<synth::BenchmarkSample>& samples);

/// Class- and region-labelled cuboids from every snippet of the training
/// sequences, capped at `train_max_cuboids` by a seeded subsample.
std::vector<Cuboid> training_cuboids(const Dataset& data, const RunConfig& config);

std::vector<Minisequence> to_minisequences(const std::vector<Cuboid>& cuboids, std::size_t delta_t);

ModelBank train_bank(const Dataset& data, const RunConfig& config);

/// One feature per snippet of every sequence, in dataset order.
std::vector<dataio::LabeledFeature> featurize(const Dataset& data, const ModelBank& bank, const RunConfig& config);

/// Trains on the `train` records; SD-SFA banks add mirrored copies when
/// `config.mirror` is set.
LinearClassifier fit_classifier(const std::vector<dataio::LabeledFeature>& features, const ModelBank& bank,
                                const RunConfig& config);

/// `block_sums(i, j)`: summed squared derivatives of class-i cuboids under
/// the functions learned for class j. Needs a bank with per-class models.
Matrix selectivity_sums(const std::vector<Cuboid>& cuboids, const ModelBank& bank);

struct SequencePrediction {
  std::string name;
  std::int32_t truth = 0;
  std::int32_t predicted = 0;
};

struct BaselineResult {
  double sequence_accuracy = 0.0;
  double frame_accuracy = 0.0;
};

struct Evaluation {
  Strategy strategy = Strategy::DSFA;
  std::size_t test_sequences = 0;
  std::size_t test_snippets = 0;
  double sequence_accuracy = 0.0;
  double frame_accuracy = 0.0;
  ConfusionMatrix confusion;  // sequence level
  std::vector<SequencePrediction> predictions;
  std::optional<SelectivityTable> selectivity;
  FisherScores fisher;
  std::optional<BaselineResult> baseline;
};

/// Scores the test records. Selectivity uses the training cuboids when the
/// bank has per-class models; the raw-pixel baseline runs when
/// `config.baseline` is set.
Evaluation evaluate(const Dataset& data, const ModelBank& bank, const std::vector<dataio::LabeledFeature>& features,
                    const LinearClassifier& clf, const RunConfig& config);

/// ASD of PCA-projected raw cuboids (no slow feature transform) under the
/// same sampling and classifier.
BaselineResult run_baseline(const Dataset& data, const RunConfig& config);

std::string format_report(const Evaluation& ev);
std::string format_results(const Evaluation& ev);

struct ToyResult {
  double correlation = 0.0;      // |corr(y₁, latent)|
  double output_delta = 0.0;     // Δ of y₁
  double min_input_delta = 0.0;  // smallest Δ over standardized input channels
  double latent_delta = 0.0;
  Vector eigenvalues;
  Vector output_deltas;  // per output, pooled within chunks
};

/// U-SFA with quadratic expansion on the two-channel toy signal, cut into
/// chunks of `chunk` samples.
ToyResult run_toy(std::size_t frames, std::uint64_t seed, std::size_t chunk = 100);

std::string format_toy_results(const ToyResult& r);

}  // namespace sfa::pipeline
