#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "sfa/dataio.hpp"
#include "support.hpp"

using namespace sfa;
using namespace sfa::dataio;
using testing::code_of;

namespace {

FrameSequence byte_sequence(std::size_t t, std::size_t h, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FrameSequence s(t, h, w);
  for (double& v : s.pixels) v = double(uniform_below(rng, 256));
  return s;
}

ModelBank small_bank(Strategy strategy) {
  FitOptions o;
  o.pca_dim = 3;
  o.k = 2;
  o.grid = {2, 1};
  ModelBank bank = fit(strategy, testing::ar_minisequences(20, 2, 4, 6, 3, 2), o);
  bank.geometry = {1, 2, 5, 3};
  return bank;
}

void put_u32(std::vector<std::uint8_t>& bytes, std::size_t offset, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes[offset + std::size_t(i)] = std::uint8_t(v >> (8 * i));
}

}  // namespace

TEST_CASE("SFV1 layout and round trip") {
  FrameSequence s(2, 1, 2);
  s.pixels = {0.4, 254.6, -3.0, 300.0};
  const auto bytes = encode_sequence(s);
  const std::vector<std::uint8_t> expected{'S', 'F', 'V', '1', 2, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 0, 255, 0, 255};
  CHECK(bytes == expected);
  CHECK(decode_sequence(bytes).pixels == std::vector<double>{0, 255, 0, 255});

  const auto r = byte_sequence(3, 4, 5, 1);
  const auto back = decode_sequence(encode_sequence(r));
  CHECK(back.pixels == r.pixels);
  CHECK(back.frames == 3);
  CHECK(back.height == 4);
  CHECK(back.width == 5);
}

TEST_CASE("SFV1 error codes") {
  auto bytes = encode_sequence(byte_sequence(2, 2, 2, 2));
  auto truncated = bytes;
  truncated.pop_back();
  CHECK(code_of([&] { decode_sequence(truncated); }) == ErrorCode::TruncatedFile);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK(code_of([&] { decode_sequence(trailing); }) == ErrorCode::FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK(code_of([&] { decode_sequence(magic); }) == ErrorCode::FormatError);
  auto zero = bytes;
  put_u32(zero, 4, 0);
  CHECK(code_of([&] { decode_sequence(zero); }) == ErrorCode::FormatError);
  CHECK(code_of([] { decode_sequence({'S', 'F'}); }) == ErrorCode::TruncatedFile);
}

TEST_CASE("annotations: carry forward, leading frames without a box, errors name the line") {
  const auto boxes = parse_annotations("2 1 1 3 3\n\n5 0 0 4 4\n", 7, 8, 8);
  REQUIRE(boxes.size() == 7);
  CHECK(!boxes[0]);
  CHECK(!boxes[1]);
  CHECK(boxes[2] == BoundingBox{1, 1, 3, 3});
  CHECK(boxes[4] == BoundingBox{1, 1, 3, 3});
  CHECK(boxes[6] == BoundingBox{0, 0, 4, 4});
  CHECK(parse_annotations(format_annotations(boxes), 7, 8, 8) == boxes);

  CHECK(code_of([] { parse_annotations("0 0 0 2 2\n0 0 0 2 2\n", 3, 4, 4); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_annotations("0 0 0 5 2\n", 3, 4, 4); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_annotations("3 0 0 1 1\n", 3, 4, 4); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_annotations("0 0 0 1\n", 3, 4, 4); }) == ErrorCode::ParseError);
  try {
    parse_annotations("0 0 0 1 1\n1 0 0 1 1 9\n", 3, 4, 4);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("model banks round-trip exactly for every strategy") {
  for (auto s : {Strategy::USFA, Strategy::SSFA, Strategy::DSFA, Strategy::SDSFA}) {
    const ModelBank bank = small_bank(s);
    const auto bytes = encode_bank(bank);
    CHECK(std::memcmp(bytes.data(), "SFAM", 4) == 0);
    CHECK(decode_bank(bytes) == bank);
    CHECK(encode_bank(decode_bank(bytes)) == bytes);
  }
}

TEST_CASE("model bank corruption is detected") {
  const auto bytes = encode_bank(small_bank(Strategy::DSFA));
  auto version = bytes;
  put_u32(version, 4, 2);
  CHECK(code_of([&] { decode_bank(version); }) == ErrorCode::UnsupportedVersion);
  auto tag = bytes;
  put_u32(tag, 8, 9);
  CHECK(code_of([&] { decode_bank(tag); }) == ErrorCode::FormatError);
  auto count = bytes;
  put_u32(count, 8, std::uint32_t(Strategy::USFA));  // two models but U-SFA expects one
  CHECK(code_of([&] { decode_bank(count); }) == ErrorCode::FormatError);
  auto sd = bytes;
  put_u32(sd, 8, std::uint32_t(Strategy::SDSFA));  // 1×1 grid, two classes: still two models
  CHECK_NOTHROW(decode_bank(sd));
  auto truncated = bytes;
  truncated.resize(bytes.size() - 9);
  CHECK(code_of([&] { decode_bank(truncated); }) == ErrorCode::TruncatedFile);
  auto trailing = bytes;
  trailing.push_back(1);
  CHECK(code_of([&] { decode_bank(trailing); }) == ErrorCode::FormatError);
}

TEST_CASE("feature sets and classifiers round-trip") {
  std::vector<LabeledFeature> fs;
  for (std::uint32_t i = 0; i < 5; ++i)
    fs.push_back({AsdFeature{Vector{0.1 * i, 1.0 / 3.0, -0.0}, i, 2 * i, i % 2 == 0}, std::int32_t(i) - 1, i < 3});
  CHECK(decode_features(encode_features(fs)) == fs);
  CHECK(decode_features(encode_features({})).empty());
  auto ragged = fs;
  ragged[1].feature.values.pop_back();
  CHECK(code_of([&] { encode_features(ragged); }) == ErrorCode::InvalidDimension);
  auto v2 = encode_features(fs);
  put_u32(v2, 4, 7);
  CHECK(code_of([&] { decode_features(v2); }) == ErrorCode::UnsupportedVersion);

  LinearClassifier clf;
  clf.weights = Matrix{{1.5, -2.0}, {0.25, 1e-300}};
  clf.biases = {0.5, -0.5};
  clf.labels = {3, 8};
  clf.class_names = {"wave", "bend"};
  CHECK(decode_classifier(encode_classifier(clf)) == clf);
  auto broken = clf;
  broken.labels.pop_back();
  CHECK(code_of([&] { encode_classifier(broken); }) == ErrorCode::InvalidInput);
}

TEST_CASE("manifest parsing") {
  const auto entries = parse_manifest("a 0 train\n\nb 3 test\n");
  REQUIRE(entries.size() == 2);
  CHECK(entries[1] == DatasetEntry{"b", 3, false});
  CHECK(parse_manifest(format_manifest(entries)) == entries);
  CHECK(code_of([] { parse_manifest("a 0 validate\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_manifest("a x train\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_manifest("a 0 train extra\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("files: atomic writes, loading entries, missing paths") {
  const auto dir = testing::temp_dir("dataio");
  const auto seq = byte_sequence(3, 6, 6, 4);
  save_sequence((dir / "clip.sfv").string(), seq);
  write_file_atomic((dir / kManifestName).string(), std::string("clip 2 train\n"));
  CHECK(!std::filesystem::exists(dir / "clip.sfv.tmp"));
  const auto manifest = load_manifest(dir.string());
  REQUIRE(manifest.size() == 1);
  CHECK(load_entry(dir.string(), manifest[0]).boxes.empty());

  save_annotations((dir / "clip.ann").string(), {BoundingBox{1, 1, 2, 2}, std::nullopt, std::nullopt});
  const auto boxed = load_entry(dir.string(), manifest[0]);
  CHECK(boxed.pixels == seq.pixels);
  CHECK(boxed.box(2) == BoundingBox{1, 1, 2, 2});

  CHECK(code_of([&] { load_sequence((dir / "absent.sfv").string()); }) == ErrorCode::IoError);
  CHECK(code_of([&] { write_file_atomic((dir / "no" / "such" / "dir.txt").string(), std::string("x")); }) ==
        ErrorCode::IoError);
  std::filesystem::remove_all(dir);
}
