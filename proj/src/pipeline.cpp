#include "sfa/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <random>

#include "sfa/error.hpp"
#include "sfa/rng.hpp"

namespace sfa::pipeline {

namespace {

// Stream identifiers for derive_seed, one per consumer of the run seed.
constexpr std::uint64_t kTrainCuboidStream = 1;
constexpr std::uint64_t kSubsampleStream = 2;
constexpr std::uint64_t kFeatureStream = 3;

template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::int32_t> sorted_labels(const std::vector<dataio::LabeledFeature>& features) {
  std::vector<std::int32_t> labels;
  for (const auto& f : features) labels.push_back(f.label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

}  // namespace

// --- datasets ---

Dataset load_dataset(const std::string& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::IoError, "data directory not found: " + dir);
  Dataset data;
  data.entries = dataio::load_manifest(dir);
  if (data.entries.empty()) throw Error(ErrorCode::EmptyInput, "manifest in " + dir + " lists no sequences");
  for (const auto& e : data.entries) data.sequences.push_back(dataio::load_entry(dir, e));
  return data;
}

Dataset from_benchmark(const std::vector<synth::BenchmarkSample>& samples) {
  Dataset data;
  for (const auto& s : samples) {
    data.entries.push_back({s.name, s.action.label, s.train});
    data.sequences.push_back(s.action.sequence);
  }
  return data;
}

synth::BenchmarkOptions benchmark_options(const RunConfig& config) {
  synth::BenchmarkOptions o;
  o.per_class = config.synth_per_class;
  o.train_per_class = config.synth_train_per_class;
  o.frames = config.synth_frames;
  o.height = config.synth_height;
  o.width = config.synth_width;
  o.noise_sigma = config.synth_noise;
  return o;
}

void write_benchmark(const std::string& dir, const std::vector<synth::BenchmarkSample>& samples) {
  std::filesystem::create_directories(dir);
  std::vector<dataio::DatasetEntry> entries;
  for (const auto& s : samples) {
    const auto base = (std::filesystem::path(dir) / s.name).string();
    dataio::save_sequence(base + ".sfv", s.action.sequence);
    dataio::save_annotations(base + ".ann", s.action.sequence.boxes);
    entries.push_back({s.name, s.action.label, s.train});
  }
  dataio::write_file_atomic((std::filesystem::path(dir) / dataio::kManifestName).string(),
                            dataio::format_manifest(entries));
}

// --- training ---

std::vector<Cuboid> training_cuboids(const Dataset& data, const RunConfig& config) {
  const SamplingParams params = config.sampling();
  const std::uint64_t base = derive_seed(config.seed, kTrainCuboidStream);
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.entries[i].train) train.push_back(i);
  if (train.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training sequences in the dataset");

  std::vector<std::vector<Cuboid>> per_sequence(train.size());
  parallel_for(train.size(), [&](std::size_t n) {
    const std::size_t i = train[n];
    const FrameSequence& raw = data.sequences[i];
    if (raw.frames < config.geometry.d)
      throw Error(ErrorCode::TooShort, "sequence " + data.entries[i].name + " is shorter than the cuboid depth");
    const PreparedSequence prepared = prepare_sequence(raw, params.delta);
    auto& out = per_sequence[n];
    for (std::size_t s = 0; s + config.geometry.d <= raw.frames; s += params.stride) {
      auto cuboids = snippet_cuboids(prepared, s, config.geometry, config.grid, params, derive_seed(base, i, s));
      for (auto& c : cuboids) {
        c.class_label = data.entries[i].label;
        out.push_back(std::move(c));
      }
    }
  });

  std::vector<Cuboid> all;
  for (auto& v : per_sequence)
    for (auto& c : v) all.push_back(std::move(c));
  if (config.train_max_cuboids > 0 && all.size() > config.train_max_cuboids) {
    std::vector<std::size_t> idx(all.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(derive_seed(config.seed, kSubsampleStream));
    partial_shuffle(idx, config.train_max_cuboids, rng);
    idx.resize(config.train_max_cuboids);
    std::sort(idx.begin(), idx.end());
    std::vector<Cuboid> kept;
    kept.reserve(idx.size());
    for (std::size_t i : idx) kept.push_back(std::move(all[i]));
    all = std::move(kept);
  }
  return all;
}

std::vector<Minisequence> to_minisequences(const std::vector<Cuboid>& cuboids, std::size_t delta_t) {
  std::vector<Minisequence> out;
  out.reserve(cuboids.size());
  for (const auto& c : cuboids) out.push_back({reformat(c, delta_t), c.class_label, c.region_label});
  return out;
}

ModelBank train_bank(const Dataset& data, const RunConfig& config) {
  const auto minis = to_minisequences(training_cuboids(data, config), config.geometry.delta_t);
  ModelBank bank = fit(config.strategy, minis, config.fit_options());
  bank.geometry = config.geometry;
  return bank;
}

// --- features and classification ---

std::vector<dataio::LabeledFeature> featurize(const Dataset& data, const ModelBank& bank, const RunConfig& config) {
  const SamplingParams params = config.sampling();
  const std::uint64_t base = derive_seed(config.seed, kFeatureStream);
  std::vector<dataio::LabeledFeature> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto feats = featurize_sequence(data.sequences[i], bank, params, base, static_cast<std::uint32_t>(i));
    for (const auto& f : feats) out.push_back({f, data.entries[i].label, data.entries[i].train});
  }
  return out;
}

LinearClassifier fit_classifier(const std::vector<dataio::LabeledFeature>& features, const ModelBank& bank,
                                const RunConfig& config) {
  std::vector<Vector> x;
  std::vector<std::int32_t> y;
  const bool mirror = config.mirror && bank.strategy == Strategy::SDSFA;
  const std::size_t block = bank.grid.cells() == 0 ? 0 : bank.total_feature_count() / bank.grid.cells();
  for (const auto& f : features) {
    if (!f.train) continue;
    x.push_back(f.feature.values);
    y.push_back(f.label);
    if (mirror) {
      x.push_back(mirror_feature(f.feature, bank.grid, block).values);
      y.push_back(f.label);
    }
  }
  if (x.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training features");
  return train_linear(x, y, config.train_options());
}

Matrix selectivity_sums(const std::vector<Cuboid>& cuboids, const ModelBank& bank) {
  if (bank.strategy == Strategy::USFA)
    throw Error(ErrorCode::InvalidInput, "selectivity needs per-class slow feature functions");
  const std::size_t classes = bank.classes.size();
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& m : bank.models) {
    offsets.push_back(offset);
    offset += m.feature_count();
  }
  auto class_index = [&](std::int32_t label) {
    const auto it = std::lower_bound(bank.classes.begin(), bank.classes.end(), label);
    if (it == bank.classes.end() || *it != label)
      throw Error(ErrorCode::InvalidInput, "cuboid class " + std::to_string(label) + " unknown to the bank");
    return static_cast<std::size_t>(it - bank.classes.begin());
  };

  std::vector<Vector> contributions(cuboids.size());
  parallel_for(cuboids.size(), [&](std::size_t i) { contributions[i] = cuboid_contribution(cuboids[i], bank); });

  // Summed sequentially in cuboid order so the result does not depend on threads.
  Matrix sums(classes, classes);
  for (std::size_t i = 0; i < cuboids.size(); ++i) {
    const std::size_t row = class_index(cuboids[i].class_label);
    for (std::size_t m = 0; m < bank.models.size(); ++m) {
      const std::size_t col = class_index(*bank.models[m].class_label);
      double block = 0.0;
      for (std::size_t j = 0; j < bank.models[m].feature_count(); ++j) block += contributions[i][offsets[m] + j];
      sums(row, col) += block;
    }
  }
  return sums;
}

BaselineResult run_baseline(const Dataset& data, const RunConfig& config) {
  const auto minis = to_minisequences(training_cuboids(data, config), config.geometry.delta_t);
  const auto pca = fit_shared_pca(minis, std::min(config.pca_dim, config.geometry.raw_dim()));
  const ModelBank bank = pixel_pca_bank(pca, config.geometry);

  const SamplingParams params = config.sampling();
  const std::uint64_t base = derive_seed(config.seed, kFeatureStream);
  std::vector<std::vector<AsdFeature>> per_sequence(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    per_sequence[i] = featurize_sequence(data.sequences[i], bank, params, base, static_cast<std::uint32_t>(i));

  std::vector<Vector> x;
  std::vector<std::int32_t> y;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.entries[i].train)
      for (const auto& f : per_sequence[i]) {
        x.push_back(f.values);
        y.push_back(data.entries[i].label);
      }
  if (x.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training features for the baseline");
  const LinearClassifier clf = train_linear(x, y, config.train_options());

  BaselineResult r;
  std::size_t correct_seq = 0, seqs = 0, correct_frames = 0, frames = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.entries[i].train || per_sequence[i].empty()) continue;
    std::vector<std::int32_t> votes;
    for (const auto& f : per_sequence[i]) {
      votes.push_back(predict(clf, f.values));
      correct_frames += votes.back() == data.entries[i].label;
      ++frames;
    }
    correct_seq += majority_vote(votes) == data.entries[i].label;
    ++seqs;
  }
  if (seqs == 0) throw Error(ErrorCode::EmptyInput, "no test sequences");
  r.sequence_accuracy = double(correct_seq) / double(seqs);
  r.frame_accuracy = double(correct_frames) / double(frames);
  return r;
}

Evaluation evaluate(const Dataset& data, const ModelBank& bank, const std::vector<dataio::LabeledFeature>& features,
                    const LinearClassifier& clf, const RunConfig& config) {
  Evaluation ev;
  ev.strategy = bank.strategy;
  std::map<std::uint32_t, std::vector<std::int32_t>> votes;
  std::vector<std::int32_t> frame_pred, frame_truth;
  for (const auto& f : features) {
    if (f.train) continue;
    const std::int32_t p = predict(clf, f.feature.values);
    frame_pred.push_back(p);
    frame_truth.push_back(f.label);
    votes[f.feature.sequence_id].push_back(p);
  }
  if (votes.empty()) throw Error(ErrorCode::EmptyInput, "no test features to evaluate");
  ev.test_snippets = frame_pred.size();
  ev.frame_accuracy = frame_accuracy(frame_pred, frame_truth);

  std::vector<std::int32_t> seq_pred, seq_truth;
  for (const auto& [id, v] : votes) {
    if (id >= data.size()) throw Error(ErrorCode::InvalidInput, "feature refers to sequence " + std::to_string(id) +
                                                                    " outside the dataset");
    SequencePrediction p{data.entries[id].name, data.entries[id].label, majority_vote(v)};
    seq_pred.push_back(p.predicted);
    seq_truth.push_back(p.truth);
    ev.predictions.push_back(std::move(p));
  }
  ev.test_sequences = seq_pred.size();
  std::vector<std::int32_t> labels = sorted_labels(features);
  for (auto l : clf.labels)
    if (!std::binary_search(labels.begin(), labels.end(), l)) labels.insert(std::upper_bound(labels.begin(), labels.end(), l), l);
  ev.confusion = confusion_matrix(seq_pred, seq_truth, labels);
  ev.sequence_accuracy = ev.confusion.accuracy();

  std::vector<Vector> fx;
  std::vector<std::int32_t> fy;
  for (const auto& f : features) {
    fx.push_back(f.feature.values);
    fy.push_back(f.label);
  }
  ev.fisher = fisher_score(fx, fy);

  if (bank.strategy != Strategy::USFA) {
    RunConfig c = config;
    c.geometry = bank.geometry;
    c.grid = bank.grid;
    ev.selectivity = selectivity_table(selectivity_sums(training_cuboids(data, c), bank));
  }
  if (config.baseline) ev.baseline = run_baseline(data, config);
  return ev;
}

// --- reports ---

std::string format_report(const Evaluation& ev) {
  std::string out;
  out += "strategy: " + std::string(to_string(ev.strategy)) + "\n";
  out += "test sequences: " + std::to_string(ev.test_sequences) + "  test snippets: " +
         std::to_string(ev.test_snippets) + "\n";
  out += "sequence accuracy: " + fmt("%.4f", ev.sequence_accuracy) + "\n";
  out += "frame accuracy:    " + fmt("%.4f", ev.frame_accuracy) + "\n";
  if (ev.baseline) {
    out += "baseline sequence accuracy: " + fmt("%.4f", ev.baseline->sequence_accuracy) + "\n";
    out += "baseline frame accuracy:    " + fmt("%.4f", ev.baseline->frame_accuracy) + "\n";
  }

  out += "\nconfusion matrix (rows: predicted, columns: true)\n";
  out += "      ";
  for (auto l : ev.confusion.labels) out += fmt("%6.0f", double(l));
  out += "\n";
  for (std::size_t p = 0; p < ev.confusion.labels.size(); ++p) {
    out += fmt("%6.0f", double(ev.confusion.labels[p]));
    for (std::size_t t = 0; t < ev.confusion.labels.size(); ++t) out += fmt("%6.0f", double(ev.confusion.counts[p][t]));
    out += "\n";
  }

  if (ev.selectivity) {
    const auto& s = *ev.selectivity;
    out += "\nselectivity (rows: cuboid class, columns: function class)\n";
    for (std::size_t i = 0; i < s.ratios.rows(); ++i) {
      for (std::size_t j = 0; j < s.ratios.cols(); ++j) out += fmt("%9.3f", s.ratios(i, j));
      out += "   min off-diagonal " + fmt("%.3f", s.row_selectivity[i]) + "\n";
    }
    out += "average selectivity: " + fmt("%.4f", s.average) + "\n";
  }

  out += "\nmean Fisher score: " + fmt("%.6g", ev.fisher.mean) + "\n";
  out += "\npredictions\n";
  for (const auto& p : ev.predictions)
    out += "  " + p.name + "  true " + std::to_string(p.truth) + "  predicted " + std::to_string(p.predicted) + "\n";
  return out;
}

std::string format_results(const Evaluation& ev) {
  std::vector<std::pair<std::string, std::string>> kv{
      {"strategy", std::string(to_string(ev.strategy))},
      {"test_sequences", std::to_string(ev.test_sequences)},
      {"test_snippets", std::to_string(ev.test_snippets)},
      {"sequence_accuracy", format_double(ev.sequence_accuracy)},
      {"frame_accuracy", format_double(ev.frame_accuracy)},
      {"fisher_mean", format_double(ev.fisher.mean)},
  };
  if (ev.selectivity) kv.emplace_back("average_selectivity", format_double(ev.selectivity->average));
  if (ev.baseline) {
    kv.emplace_back("baseline_sequence_accuracy", format_double(ev.baseline->sequence_accuracy));
    kv.emplace_back("baseline_frame_accuracy", format_double(ev.baseline->frame_accuracy));
  }
  const auto& c = ev.confusion;
  for (std::size_t p = 0; p < c.labels.size(); ++p)
    for (std::size_t t = 0; t < c.labels.size(); ++t)
      kv.emplace_back("confusion_" + std::to_string(c.labels[p]) + "_" + std::to_string(c.labels[t]),
                      std::to_string(c.counts[p][t]));
  return format_key_values(kv);
}

// --- toy problem ---

namespace {

Vector standardized(const Vector& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / double(v.size()));
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean) / sd;
  return out;
}

double abs_correlation(const Vector& a, const Vector& b) {
  const Vector za = standardized(a), zb = standardized(b);
  double s = 0.0;
  for (std::size_t i = 0; i < za.size(); ++i) s += za[i] * zb[i];
  return std::abs(s / double(za.size()));
}

}  // namespace

ToyResult run_toy(std::size_t frames, std::uint64_t seed, std::size_t chunk) {
  const synth::ToySignal toy = synth::toy_slow_signal(frames, seed);
  if (chunk < 2) throw Error(ErrorCode::InvalidInput, "chunk length must be at least 2");
  std::vector<Minisequence> minis;
  for (std::size_t start = 0; start + 2 <= frames; start += chunk) {
    const std::size_t len = std::min(chunk, frames - start);
    Matrix m(len, 2);
    for (std::size_t t = 0; t < len; ++t) {
      m(t, 0) = toy.observed(start + t, 0);
      m(t, 1) = toy.observed(start + t, 1);
    }
    minis.push_back({std::move(m)});
  }
  FitOptions options;
  options.pca_dim = 2;
  options.k = 5;
  const ModelBank bank = fit_usfa(minis, options);
  const SlowFeatureModel& model = bank.models.front();
  const Matrix y = apply_sequence(model, toy.observed);

  ToyResult r;
  r.eigenvalues = model.eigenvalues;
  const Vector y1 = y.column(0);
  r.correlation = abs_correlation(y1, toy.latent);
  r.output_delta = delta_value(y1);
  r.latent_delta = delta_value(standardized(toy.latent));
  r.min_input_delta = std::min(delta_value(standardized(toy.observed.column(0))),
                               delta_value(standardized(toy.observed.column(1))));
  r.output_deltas.assign(model.feature_count(), 0.0);
  for (std::size_t j = 0; j < model.feature_count(); ++j) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& m : minis) {
      const Matrix ym = apply_sequence(model, m.data);
      for (std::size_t t = 0; t + 1 < ym.rows(); ++t) {
        const double d = ym(t + 1, j) - ym(t, j);
        sum += d * d;
        ++n;
      }
    }
    r.output_deltas[j] = sum / double(n);
  }
  return r;
}

std::string format_toy_results(const ToyResult& r) {
  std::vector<std::pair<std::string, std::string>> kv{
      {"correlation", format_double(r.correlation)},
      {"output_delta", format_double(r.output_delta)},
      {"min_input_delta", format_double(r.min_input_delta)},
      {"latent_delta", format_double(r.latent_delta)},
  };
  for (std::size_t j = 0; j < r.eigenvalues.size(); ++j) {
    kv.emplace_back("eigenvalue_" + std::to_string(j), format_double(r.eigenvalues[j]));
    kv.emplace_back("pooled_delta_" + std::to_string(j), format_double(r.output_deltas[j]));
  }
  return format_key_values(kv);
}

}  // namespace sfa::pipeline
