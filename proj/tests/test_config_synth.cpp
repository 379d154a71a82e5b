#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles/oracles.hpp"
#include "sfa/config.hpp"
#include "sfa/synth.hpp"
#include "support.hpp"

using namespace sfa;
using testing::code_of;

TEST_CASE("an empty config gives the defaults") {
  const RunConfig c = parse_config("  \n# only a comment\n");
  const RunConfig d;
  for (const auto& key : config_keys()) CHECK(get_config_value(c, key) == get_config_value(d, key));
  CHECK(c.strategy == Strategy::DSFA);
  CHECK(c.geometry == CuboidGeometry{16, 16, 7, 3});
  CHECK(c.pca_dim == 50);
  CHECK(c.k == 200);
  CHECK(c.gamma == 0.2);
  CHECK(c.grid == Grid{2, 3});
}

TEST_CASE("config values parse, override a base and round-trip through text") {
  const RunConfig c = parse_config("gamma = 0.35  # discriminative weight\nstrategy=SDSFA\ngrid_x = 3\nmirror = no\n"
                                   "delta_mode = absolute\ndata_dir = /tmp/some dir\n");
  CHECK(c.gamma == 0.35);
  CHECK(c.strategy == Strategy::SDSFA);
  CHECK(c.grid.cols == 3);
  CHECK(!c.mirror);
  CHECK(!c.delta_relative);
  CHECK(c.data_dir == "/tmp/some dir");

  std::string text;
  for (const auto& key : config_keys()) text += key + " = " + get_config_value(c, key) + "\n";
  const RunConfig back = parse_config(text);
  for (const auto& key : config_keys()) CHECK(get_config_value(back, key) == get_config_value(c, key));

  RunConfig base;
  base.k = 7;
  CHECK(parse_config("pca_dim = 5", base).k == 7);
}

TEST_CASE("config errors name the line and collect unknown keys") {
  try {
    parse_config("k = 3\ngamma = abc\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  try {
    parse_config("colour = red\nk = 3\nflavour = x\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("colour (line 1)") != std::string::npos);
    CHECK(msg.find("flavour (line 3)") != std::string::npos);
  }
  CHECK(code_of([] { parse_config("k 3\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_config("k = -1\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_config("strategy = lda\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_config("gamma = inf\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { load_config("/nonexistent/config.txt"); }) == ErrorCode::IoError);
}

TEST_CASE("format_double is the shortest exact representation") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 123456789.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.2) == "0.2");
  const auto kv = parse_key_values(format_key_values({{"a", "1"}, {"b", "x y"}}));
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("b") == "x y");
}

TEST_CASE("the toy latent is slower than either observed channel") {
  const auto sig = synth::toy_slow_signal(1000, 3);
  CHECK(sig.observed.rows() == 1000);
  auto standardized_delta = [](std::vector<double> v) {
    double mean = 0.0, var = 0.0;
    for (double x : v) mean += x;
    mean /= double(v.size());
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / double(v.size()));
    for (double& x : v) x = (x - mean) / sd;
    return oracle::delta(v);
  };
  const double latent = standardized_delta(sig.latent);
  CHECK(latent < 0.1 * standardized_delta(sig.observed.column(0)));
  CHECK(latent < 0.1 * standardized_delta(sig.observed.column(1)));
  for (std::size_t t = 0; t < 1000; ++t)
    CHECK(sig.observed(t, 0) == doctest::Approx(sig.latent[t] + sig.observed(t, 1) * sig.observed(t, 1)));
  CHECK(synth::toy_slow_signal(1000, 3).observed == sig.observed);
  CHECK(code_of([] { synth::toy_slow_signal(50, 1); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("rendering is deterministic and the noise seed leaves the motion unchanged") {
  synth::SynthSpec spec;
  spec.kind = synth::ActionKind::BlobPulse;
  spec.size = 6.0;
  spec.length = 3.0;
  const auto a = synth::generate_action(spec);
  CHECK(synth::generate_action(spec).sequence.pixels == a.sequence.pixels);
  CHECK(a.label == 3);
  CHECK(a.sequence.boxes.size() == spec.frames);

  spec.noise_sigma = 0.0;
  const auto clean1 = synth::generate_action(spec);
  spec.seed = 99;
  const auto clean2 = synth::generate_action(spec);
  CHECK(clean1.sequence.pixels == clean2.sequence.pixels);
  for (double v : a.sequence.pixels) CHECK((v >= 0.0 && v <= 255.0 && v == std::round(v)));
}

TEST_CASE("a noiseless translating disc only changes pixels near its path") {
  synth::SynthSpec spec;
  spec.kind = synth::ActionKind::BlobTranslate;
  spec.noise_sigma = 0.0;
  spec.size = 4.0;
  const auto diff = frame_difference(synth::generate_action(spec).sequence);
  const double cy = (double(spec.height) - 1.0) / 2.0;
  std::size_t changed = 0;
  for (std::size_t t = 0; t < diff.frames; ++t)
    for (std::size_t y = 0; y < diff.height; ++y)
      for (std::size_t x = 0; x < diff.width; ++x)
        if (diff.at(t, y, x) != 0.0) {
          ++changed;
          CHECK(std::abs(double(y) - cy) <= spec.size + 1.0);
        }
  CHECK(changed > 0);
  CHECK(changed < diff.pixels.size() / 4);
}

TEST_CASE("invalid specs are rejected") {
  synth::SynthSpec spec;
  spec.noise_sigma = -1.0;
  CHECK(code_of([&] { synth::generate_action(spec); }) == ErrorCode::InvalidSpec);
  spec = {};
  spec.length = 40.0;
  CHECK(code_of([&] { synth::generate_action(spec); }) == ErrorCode::InvalidSpec);
  spec = {};
  spec.width = 2;
  CHECK(code_of([&] { synth::generate_action(spec); }) == ErrorCode::InvalidSpec);
  synth::BenchmarkOptions o;
  o.train_per_class = o.per_class + 1;
  CHECK(code_of([&] { synth::make_benchmark(1, o); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("the benchmark is stratified, labelled by kind and reproducible") {
  synth::BenchmarkOptions o;
  o.per_class = 5;
  o.train_per_class = 3;
  o.frames = 12;
  const auto a = synth::make_benchmark(4, o);
  REQUIRE(a.size() == 20);
  std::set<std::string> names;
  std::size_t train[4] = {};
  for (const auto& s : a) {
    names.insert(s.name);
    train[s.action.label] += s.train;
    CHECK(s.action.sequence.frames == 12);
  }
  CHECK(names.size() == 20);
  for (std::size_t c = 0; c < 4; ++c) CHECK(train[c] == 3);
  const auto b = synth::make_benchmark(4, o);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(a[i].train == b[i].train);
    CHECK(a[i].action.sequence.pixels == b[i].action.sequence.pixels);
  }
  CHECK(synth::make_benchmark(5, o)[0].action.sequence.pixels != a[0].action.sequence.pixels);
}
