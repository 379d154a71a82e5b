#include "sfa/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "sfa/error.hpp"

namespace sfa {

FitOptions RunConfig::fit_options() const {
  FitOptions o;
  o.pca_dim = pca_dim;
  o.k = k;
  o.gamma = gamma;
  o.rel_cutoff = rel_cutoff;
  o.grid = grid;
  return o;
}

SamplingParams RunConfig::sampling() const {
  SamplingParams p;
  p.fraction = fraction;
  p.delta = DeltaRule{delta_relative, delta};
  p.stride = stride;
  if (max_cuboids_per_snippet > 0) p.max_count = max_cuboids_per_snippet;
  return p;
}

TrainOptions RunConfig::train_options() const { return {svm_c, svm_epochs, seed}; }

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::size_t line, const char* expected) {
  std::string msg;
  if (line > 0) msg = "line " + std::to_string(line) + ": ";
  msg += "invalid value '" + std::string(value) + "' for " + std::string(key) + " (expected " + expected + ")";
  throw Error(ErrorCode::ParseError, msg);
}

double parse_real(std::string_view key, std::string_view v, std::size_t line) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, line, "a real number");
  return out;
}

std::uint64_t parse_uint(std::string_view key, std::string_view v, std::size_t line) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad_value(key, v, line, "a nonnegative integer");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v, std::size_t line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, line, "true or false");
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view, std::size_t)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field size_field(std::string key, T RunConfig::*member) {
  return {key,
          [member, key](RunConfig& c, std::string_view v, std::size_t line) {
            c.*member = static_cast<T>(parse_uint(key, v, line));
          },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field real_field(std::string key, double RunConfig::*member) {
  return {key, [member, key](RunConfig& c, std::string_view v, std::size_t line) { c.*member = parse_real(key, v, line); },
          [member](const RunConfig& c) { return format_double(c.*member); }};
}

Field bool_field(std::string key, bool RunConfig::*member) {
  return {key, [member, key](RunConfig& c, std::string_view v, std::size_t line) { c.*member = parse_bool(key, v, line); },
          [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field string_field(std::string key, std::string RunConfig::*member) {
  return {key, [member](RunConfig& c, std::string_view v, std::size_t) { c.*member = std::string(v); },
          [member](const RunConfig& c) { return c.*member; }};
}

template <class F>
Field geometry_field(std::string key, F access) {
  return {key,
          [access, key](RunConfig& c, std::string_view v, std::size_t line) {
            access(c) = static_cast<std::size_t>(parse_uint(key, v, line));
          },
          [access](const RunConfig& c) {
            RunConfig copy = c;
            return std::to_string(access(copy));
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"strategy", [](RunConfig& c, std::string_view v, std::size_t line) {
                   try {
                     c.strategy = parse_strategy(v);
                   } catch (const Error&) {
                     bad_value("strategy", v, line, "usfa, ssfa, dsfa or sdsfa");
                   }
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.strategy)); }});
    f.push_back(geometry_field("cuboid_h", [](RunConfig& c) -> std::size_t& { return c.geometry.h; }));
    f.push_back(geometry_field("cuboid_w", [](RunConfig& c) -> std::size_t& { return c.geometry.w; }));
    f.push_back(geometry_field("cuboid_d", [](RunConfig& c) -> std::size_t& { return c.geometry.d; }));
    f.push_back(geometry_field("delta_t", [](RunConfig& c) -> std::size_t& { return c.geometry.delta_t; }));
    f.push_back(size_field("pca_dim", &RunConfig::pca_dim));
    f.push_back(size_field("k", &RunConfig::k));
    f.push_back(real_field("gamma", &RunConfig::gamma));
    f.push_back(geometry_field("grid_x", [](RunConfig& c) -> std::size_t& { return c.grid.cols; }));
    f.push_back(geometry_field("grid_y", [](RunConfig& c) -> std::size_t& { return c.grid.rows; }));
    f.push_back(real_field("fraction", &RunConfig::fraction));
    f.push_back({"delta_mode",
                 [](RunConfig& c, std::string_view v, std::size_t line) {
                   if (v == "relative") c.delta_relative = true;
                   else if (v == "absolute") c.delta_relative = false;
                   else bad_value("delta_mode", v, line, "relative or absolute");
                 },
                 [](const RunConfig& c) { return std::string(c.delta_relative ? "relative" : "absolute"); }});
    f.push_back(real_field("delta", &RunConfig::delta));
    f.push_back(size_field("stride", &RunConfig::stride));
    f.push_back(size_field("max_cuboids_per_snippet", &RunConfig::max_cuboids_per_snippet));
    f.push_back(size_field("train_max_cuboids", &RunConfig::train_max_cuboids));
    f.push_back(real_field("rel_cutoff", &RunConfig::rel_cutoff));
    f.push_back(real_field("svm_c", &RunConfig::svm_c));
    f.push_back(size_field("svm_epochs", &RunConfig::svm_epochs));
    f.push_back(bool_field("mirror", &RunConfig::mirror));
    f.push_back(bool_field("baseline", &RunConfig::baseline));
    f.push_back(size_field("seed", &RunConfig::seed));
    f.push_back(string_field("data_dir", &RunConfig::data_dir));
    f.push_back(string_field("bank_path", &RunConfig::bank_path));
    f.push_back(string_field("features_path", &RunConfig::features_path));
    f.push_back(string_field("classifier_path", &RunConfig::classifier_path));
    f.push_back(string_field("report_path", &RunConfig::report_path));
    f.push_back(string_field("results_path", &RunConfig::results_path));
    f.push_back(size_field("synth_per_class", &RunConfig::synth_per_class));
    f.push_back(size_field("synth_train_per_class", &RunConfig::synth_train_per_class));
    f.push_back(size_field("synth_frames", &RunConfig::synth_frames));
    f.push_back(size_field("synth_height", &RunConfig::synth_height));
    f.push_back(size_field("synth_width", &RunConfig::synth_width));
    f.push_back(real_field("synth_noise", &RunConfig::synth_noise));
    f.push_back(size_field("toy_frames", &RunConfig::toy_frames));
    return f;
  }();
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

// Splits a `key = value` line; returns false for blank or comment-only lines.
bool split_line(std::string_view raw, std::size_t line, std::string_view& key, std::string_view& value) {
  if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
  raw = trim(raw);
  if (raw.empty()) return false;
  const auto eq = raw.find('=');
  if (eq == std::string_view::npos)
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": expected 'key = value'");
  key = trim(raw.substr(0, eq));
  value = trim(raw.substr(eq + 1));
  if (key.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": empty key");
  return true;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void set_config_value(RunConfig& config, std::string_view key, std::string_view value, std::size_t line) {
  const Field* f = find_field(key);
  if (!f) throw Error(ErrorCode::ParseError, "unknown config key: " + std::string(key));
  f->set(config, value, line);
}

std::string get_config_value(const RunConfig& config, std::string_view key) {
  const Field* f = find_field(key);
  if (!f) throw Error(ErrorCode::ParseError, "unknown config key: " + std::string(key));
  return f->get(config);
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::vector<std::string> unknown;
  std::size_t line = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line;
    std::string_view key, value;
    if (!split_line(raw, line, key, value)) continue;
    const Field* f = find_field(key);
    if (!f) {
      unknown.push_back(std::string(key) + " (line " + std::to_string(line) + ")");
      continue;
    }
    f->set(base, value, line);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& u : unknown) msg += " " + u;
    throw Error(ErrorCode::ParseError, msg);
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line;
    std::string_view key, value;
    if (split_line(raw, line, key, value)) out[std::string(key)] = std::string(value);
  }
  return out;
}

std::string format_key_values(const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  return out;
}

}  // namespace sfa
