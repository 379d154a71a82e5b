#pragma once

// Persistence. Every binary format is little-endian with a four-byte magic:
//
//   SFV1  raw video      u32 T, H, W; then T·H·W u8 pixels (frame-major, row-major)
//   SFAM  model bank     u32 version, strategy, grid, geometry, classes, models
//   SFAF  feature set    u32 version, count, dim; labelled f64 records
//   SFAC  classifier     u32 version, classes, dim; labels, names, f64 weights
//
// Annotations are text, one `t x y w h` line per annotated frame. Writers go
// through a temporary file and a rename, so a failed write leaves no output.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sfa/classify.hpp"
#include "sfa/cuboid.hpp"
#include "sfa/features.hpp"
#include "sfa/sfa.hpp"

namespace sfa::dataio {

inline constexpr std::uint32_t kBankVersion = 1;
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::uint32_t kClassifierVersion = 1;

std::vector<std::uint8_t> encode_sequence(const FrameSequence& seq);
/// Pixels are rounded and clamped to [0, 255] on encode.
FrameSequence decode_sequence(const std::vector<std::uint8_t>& bytes);
void save_sequence(const std::string& path, const FrameSequence& seq);
FrameSequence load_sequence(const std::string& path);

/// One entry per frame; frames before the first line have no box, later
/// unlisted frames inherit the previous box.
std::vector<std::optional<BoundingBox>> parse_annotations(const std::string& text, std::size_t frames,
                                                          std::size_t height, std::size_t width);
std::string format_annotations(const std::vector<std::optional<BoundingBox>>& boxes);
std::vector<std::optional<BoundingBox>> load_annotations(const std::string& path, std::size_t frames,
                                                         std::size_t height, std::size_t width);
void save_annotations(const std::string& path, const std::vector<std::optional<BoundingBox>>& boxes);

std::vector<std::uint8_t> encode_bank(const ModelBank& bank);
ModelBank decode_bank(const std::vector<std::uint8_t>& bytes);
void save_bank(const std::string& path, const ModelBank& bank);
ModelBank load_bank(const std::string& path);

struct LabeledFeature {
  AsdFeature feature;
  std::int32_t label = -1;
  bool train = false;
  friend bool operator==(const LabeledFeature&, const LabeledFeature&) = default;
};

std::vector<std::uint8_t> encode_features(const std::vector<LabeledFeature>& features);
std::vector<LabeledFeature> decode_features(const std::vector<std::uint8_t>& bytes);
void save_features(const std::string& path, const std::vector<LabeledFeature>& features);
std::vector<LabeledFeature> load_features(const std::string& path);

std::vector<std::uint8_t> encode_classifier(const LinearClassifier& clf);
LinearClassifier decode_classifier(const std::vector<std::uint8_t>& bytes);
void save_classifier(const std::string& path, const LinearClassifier& clf);
LinearClassifier load_classifier(const std::string& path);

/// Dataset manifest: `name label split` per line (split is train or test).
/// Each entry has `<name>.sfv` and, optionally, `<name>.ann` beside it.
struct DatasetEntry {
  std::string name;
  std::int32_t label = 0;
  bool train = true;
  friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

inline constexpr const char* kManifestName = "dataset.txt";

std::vector<DatasetEntry> parse_manifest(const std::string& text);
std::string format_manifest(const std::vector<DatasetEntry>& entries);
std::vector<DatasetEntry> load_manifest(const std::string& dir);

/// Loads `<dir>/<name>.sfv` plus its annotation file when present.
FrameSequence load_entry(const std::string& dir, const DatasetEntry& entry);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& contents);
void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& contents);
std::string read_text(const std::string& path);

}  // namespace sfa::dataio
