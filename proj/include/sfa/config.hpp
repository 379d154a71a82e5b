#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sfa/classify.hpp"
#include "sfa/features.hpp"
#include "sfa/sfa.hpp"

namespace sfa {

/// Every tunable of the batch pipeline. Defaults are the values used for the
/// published experiments where those exist.
struct RunConfig {
  Strategy strategy = Strategy::DSFA;
  CuboidGeometry geometry{16, 16, 7, 3};
  std::size_t pca_dim = 50;
  std::size_t k = 200;
  double gamma = 0.2;
  Grid grid{2, 3};
  double fraction = 0.25;
  bool delta_relative = true;
  double delta = 0.1;
  std::size_t stride = 1;
  std::size_t max_cuboids_per_snippet = 0;  // 0: unlimited
  std::size_t train_max_cuboids = 0;        // 0: unlimited
  double rel_cutoff = linalg::kDefaultRelCutoff;
  double svm_c = 1.0;
  std::size_t svm_epochs = 50;
  bool mirror = true;  // only affects sdsfa
  bool baseline = false;
  std::uint64_t seed = 1;

  std::string data_dir = "data";
  std::string bank_path = "bank.sfam";
  std::string features_path = "features.sfaf";
  std::string classifier_path = "classifier.sfac";
  std::string report_path = "report.txt";
  std::string results_path = "results.txt";

  std::size_t synth_per_class = 20;
  std::size_t synth_train_per_class = 15;
  std::size_t synth_frames = 60;
  std::size_t synth_height = 32;
  std::size_t synth_width = 32;
  double synth_noise = 20.0;
  std::size_t toy_frames = 2000;

  FitOptions fit_options() const;
  SamplingParams sampling() const;
  TrainOptions train_options() const;
};

/// All recognised keys, in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one key from its text value; throws ParseError naming `line` (0 when
/// the value did not come from a file).
void set_config_value(RunConfig& config, std::string_view key, std::string_view value, std::size_t line = 0);
std::string get_config_value(const RunConfig& config, std::string_view key);

/// Parses `key = value` lines; '#' starts a comment. Unknown keys are
/// collected and reported together.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Same grammar as the config; used for machine-readable results.
std::map<std::string, std::string> parse_key_values(std::string_view text);
std::string format_key_values(const std::vector<std::pair<std::string, std::string>>& entries);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace sfa
