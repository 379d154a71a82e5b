// Batch driver: synth, train, featurize, fit-classifier, evaluate, toy-sfa.
// Every RunConfig key is also a `--<key>` flag; flags override `--config`.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "sfa/config.hpp"
#include "sfa/dataio.hpp"
#include "sfa/error.hpp"
#include "sfa/pipeline.hpp"
#include "sfa/synth.hpp"

namespace {

using namespace sfa;

int cmd_synth(const RunConfig& c) {
  const auto samples = synth::make_benchmark(c.seed, pipeline::benchmark_options(c));
  pipeline::write_benchmark(c.data_dir, samples);
  std::size_t train = 0;
  for (const auto& s : samples) train += s.train;
  std::cout << "wrote " << samples.size() << " sequences (" << train << " train, " << samples.size() - train
            << " test) to " << c.data_dir << "\n";
  return 0;
}

int cmd_train(const RunConfig& c) {
  const auto data = pipeline::load_dataset(c.data_dir);
  const ModelBank bank = pipeline::train_bank(data, c);
  dataio::save_bank(c.bank_path, bank);
  std::cout << "trained " << to_string(bank.strategy) << " bank: " << bank.models.size() << " models, "
            << bank.total_feature_count() << " slow features -> " << c.bank_path << "\n";
  return 0;
}

int cmd_featurize(const RunConfig& c) {
  const auto data = pipeline::load_dataset(c.data_dir);
  const ModelBank bank = dataio::load_bank(c.bank_path);
  const auto features = pipeline::featurize(data, bank, c);
  dataio::save_features(c.features_path, features);
  std::cout << "wrote " << features.size() << " features -> " << c.features_path << "\n";
  return 0;
}

int cmd_fit_classifier(const RunConfig& c) {
  const ModelBank bank = dataio::load_bank(c.bank_path);
  const auto features = dataio::load_features(c.features_path);
  const LinearClassifier clf = pipeline::fit_classifier(features, bank, c);
  dataio::save_classifier(c.classifier_path, clf);
  std::cout << "trained classifier over " << clf.classes() << " classes -> " << c.classifier_path << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& c) {
  const auto data = pipeline::load_dataset(c.data_dir);
  const ModelBank bank = dataio::load_bank(c.bank_path);
  const auto features = dataio::load_features(c.features_path);
  const LinearClassifier clf = dataio::load_classifier(c.classifier_path);
  const auto ev = pipeline::evaluate(data, bank, features, clf, c);
  const std::string report = pipeline::format_report(ev);
  dataio::write_file_atomic(c.report_path, report);
  dataio::write_file_atomic(c.results_path, pipeline::format_results(ev));
  std::cout << report;
  return 0;
}

int cmd_toy(const RunConfig& c) {
  const auto r = pipeline::run_toy(c.toy_frames, c.seed);
  const std::string results = pipeline::format_toy_results(r);
  dataio::write_file_atomic(c.results_path, results);
  std::cout << results;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slow feature analysis for action recognition"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file");
  std::map<std::string, std::string> overrides;
  for (const auto& key : config_keys())
    app.add_option("--" + key, overrides[key])
        ->group("Configuration")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
  };
  const Command commands[] = {
      {"synth", "Render the synthetic action benchmark into data_dir", cmd_synth},
      {"train", "Fit a slow feature bank on the training sequences", cmd_train},
      {"featurize", "Compute ASD features for every sequence", cmd_featurize},
      {"fit-classifier", "Train the linear classifier on training features", cmd_fit_classifier},
      {"evaluate", "Classify the test sequences and write the report", cmd_evaluate},
      {"toy-sfa", "Recover the slow latent of the two-channel toy signal", cmd_toy},
  };
  for (const auto& cmd : commands) app.add_subcommand(cmd.name, cmd.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& key : config_keys())
      if (app.count("--" + key) > 0) set_config_value(config, key, overrides[key]);
    for (const auto& cmd : commands)
      if (app.got_subcommand(cmd.name)) return cmd.run(config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
