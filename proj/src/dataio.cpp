#include "sfa/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sfa/error.hpp"

namespace sfa::dataio {

namespace {

class Writer {
 public:
  explicit Writer(const char magic[4]) { bytes_.insert(bytes_.end(), magic, magic + 4); }

  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void count(std::size_t v) {
    if (v > UINT32_MAX) throw Error(ErrorCode::InvalidInput, "value too large for the file format");
    u32(static_cast<std::uint32_t>(v));
  }
  void f64s(std::span<const double> v) {
    for (double x : v) f64(x);
  }
  void str(const std::string& s) {
    count(s.size());
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }

  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, const char magic[4], const char* what)
      : bytes_(bytes), what_(what) {
    if (bytes_.size() < 4) throw Error(ErrorCode::TruncatedFile, std::string(what_) + ": file shorter than its magic");
    if (std::memcmp(bytes_.data(), magic, 4) != 0)
      throw Error(ErrorCode::FormatError, std::string(what_) + ": bad magic");
    pos_ = 4;
  }

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> f64s(std::size_t n) {
    need_elements(n, 8);
    std::vector<double> v(n);
    for (double& x : v) x = f64();
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void need_elements(std::size_t n, std::size_t size) {
    if (n != 0 && (bytes_.size() - pos_) / size < n) truncated();
  }
  void finish() const {
    if (pos_ != bytes_.size()) throw Error(ErrorCode::FormatError, std::string(what_) + ": trailing bytes");
  }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) {
    if (bytes_.size() - pos_ < n) truncated();
  }
  [[noreturn]] void truncated() const { throw Error(ErrorCode::TruncatedFile, std::string(what_) + ": unexpected end of file"); }

  const std::vector<std::uint8_t>& bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

void write_matrix(Writer& w, const Matrix& m) {
  w.count(m.rows());
  w.count(m.cols());
  w.f64s(m.data());
}

Matrix read_matrix(Reader& r) {
  const std::size_t rows = r.u32();
  const std::size_t cols = r.u32();
  if (cols != 0 && rows > SIZE_MAX / cols) throw Error(ErrorCode::FormatError, "matrix too large");
  return Matrix(rows, cols, r.f64s(rows * cols));
}

void write_vector(Writer& w, std::span<const double> v) {
  w.count(v.size());
  w.f64s(v);
}

Vector read_vector(Reader& r) { return r.f64s(r.u32()); }

std::int32_t optional_label(const std::optional<std::int32_t>& v) { return v ? *v : -1; }

}  // namespace

// --- raw files ---

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::string& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp);
    out.write(reinterpret_cast<const char*>(contents.data()), static_cast<std::streamsize>(contents.size()));
    if (!out.flush()) {
      std::remove(tmp.c_str());
      throw Error(ErrorCode::IoError, "write failed for " + path);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw Error(ErrorCode::IoError, "cannot rename onto " + path + ": " + ec.message());
  }
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  write_file_atomic(path, std::vector<std::uint8_t>(contents.begin(), contents.end()));
}

// --- SFV1 ---

std::vector<std::uint8_t> encode_sequence(const FrameSequence& seq) {
  if (seq.frames == 0 || seq.height == 0 || seq.width == 0)
    throw Error(ErrorCode::FormatError, "empty sequences cannot be stored");
  if (seq.pixels.size() != seq.frames * seq.height * seq.width)
    throw Error(ErrorCode::InvalidInput, "pixel count does not match T×H×W");
  Writer w("SFV1");
  w.count(seq.frames);
  w.count(seq.height);
  w.count(seq.width);
  auto bytes = w.take();
  bytes.reserve(bytes.size() + seq.pixels.size());
  for (double v : seq.pixels) bytes.push_back(static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0)));
  return bytes;
}

FrameSequence decode_sequence(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes, "SFV1", "sequence");
  const std::size_t t = r.u32(), h = r.u32(), w = r.u32();
  if (t == 0 || h == 0 || w == 0) throw Error(ErrorCode::FormatError, "sequence: zero dimension");
  const std::size_t n = t * h * w;
  if (r.remaining() < n) throw Error(ErrorCode::TruncatedFile, "sequence: fewer pixels than T×H×W");
  if (r.remaining() > n) throw Error(ErrorCode::FormatError, "sequence: trailing bytes");
  FrameSequence seq(t, h, w);
  for (std::size_t i = 0; i < n; ++i) seq.pixels[i] = static_cast<double>(r.u8());
  return seq;
}

void save_sequence(const std::string& path, const FrameSequence& seq) { write_file_atomic(path, encode_sequence(seq)); }
FrameSequence load_sequence(const std::string& path) { return decode_sequence(read_file(path)); }

// --- annotations ---

std::vector<std::optional<BoundingBox>> parse_annotations(const std::string& text, std::size_t frames,
                                                          std::size_t height, std::size_t width) {
  std::vector<std::optional<BoundingBox>> boxes(frames);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  long long last_t = -1;
  std::vector<std::pair<std::size_t, BoundingBox>> entries;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    long long t, x, y, w, h;
    std::string extra;
    if (!(ls >> t >> x >> y >> w >> h) || (ls >> extra))
      throw Error(ErrorCode::ParseError, "annotation line " + std::to_string(line_no) + ": expected 't x y w h'");
    if (t <= last_t)
      throw Error(ErrorCode::ParseError, "annotation line " + std::to_string(line_no) + ": frame indices must increase");
    if (t < 0 || static_cast<std::size_t>(t) >= frames)
      throw Error(ErrorCode::ParseError, "annotation line " + std::to_string(line_no) + ": frame out of range");
    if (x < 0 || y < 0 || w <= 0 || h <= 0 || static_cast<std::size_t>(x + w) > width ||
        static_cast<std::size_t>(y + h) > height)
      throw Error(ErrorCode::ParseError, "annotation line " + std::to_string(line_no) + ": box leaves the frame");
    last_t = t;
    entries.push_back({static_cast<std::size_t>(t),
                       BoundingBox{static_cast<std::int32_t>(x), static_cast<std::int32_t>(y),
                                   static_cast<std::int32_t>(w), static_cast<std::int32_t>(h)}});
  }
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const std::size_t end = e + 1 < entries.size() ? entries[e + 1].first : frames;
    for (std::size_t t = entries[e].first; t < end; ++t) boxes[t] = entries[e].second;
  }
  return boxes;
}

std::string format_annotations(const std::vector<std::optional<BoundingBox>>& boxes) {
  std::string out;
  for (std::size_t t = 0; t < boxes.size(); ++t) {
    if (!boxes[t]) continue;
    const auto& b = *boxes[t];
    out += std::to_string(t) + " " + std::to_string(b.x) + " " + std::to_string(b.y) + " " + std::to_string(b.w) +
           " " + std::to_string(b.h) + "\n";
  }
  return out;
}

std::vector<std::optional<BoundingBox>> load_annotations(const std::string& path, std::size_t frames,
                                                         std::size_t height, std::size_t width) {
  return parse_annotations(read_text(path), frames, height, width);
}

void save_annotations(const std::string& path, const std::vector<std::optional<BoundingBox>>& boxes) {
  write_file_atomic(path, format_annotations(boxes));
}

// --- SFAM ---

namespace {

std::size_t expected_models(Strategy s, std::size_t classes, const Grid& grid) {
  switch (s) {
    case Strategy::USFA: return 1;
    case Strategy::SSFA:
    case Strategy::DSFA: return classes;
    case Strategy::SDSFA: return classes * grid.cells();
  }
  return 0;
}

}  // namespace

std::vector<std::uint8_t> encode_bank(const ModelBank& bank) {
  Writer w("SFAM");
  w.u32(kBankVersion);
  w.u32(static_cast<std::uint32_t>(bank.strategy));
  w.count(bank.grid.cols);
  w.count(bank.grid.rows);
  w.count(bank.geometry.h);
  w.count(bank.geometry.w);
  w.count(bank.geometry.d);
  w.count(bank.geometry.delta_t);
  w.count(bank.classes.size());
  for (auto c : bank.classes) w.i32(c);
  w.count(bank.models.size());
  for (const auto& m : bank.models) {
    w.i32(optional_label(m.class_label));
    w.i32(optional_label(m.region_label));
    w.u8(m.gamma.has_value());
    w.f64(m.gamma.value_or(0.0));
    w.u32(static_cast<std::uint32_t>(m.expansion.kind));
    w.count(m.expansion.input_dim);
    w.count(m.expansion.output_dim);
    write_vector(w, m.pca.mean);
    write_matrix(w, m.pca.projection);
    write_vector(w, m.pca.explained_eigenvalues);
    write_vector(w, m.h0);
    write_matrix(w, m.w);
    write_vector(w, m.eigenvalues);
  }
  return w.take();
}

ModelBank decode_bank(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes, "SFAM", "model bank");
  const std::uint32_t version = r.u32();
  if (version != kBankVersion)
    throw Error(ErrorCode::UnsupportedVersion, "model bank version " + std::to_string(version));
  ModelBank bank;
  const std::uint32_t tag = r.u32();
  if (tag > static_cast<std::uint32_t>(Strategy::SDSFA)) throw Error(ErrorCode::FormatError, "model bank: unknown strategy tag");
  bank.strategy = static_cast<Strategy>(tag);
  bank.grid.cols = r.u32();
  bank.grid.rows = r.u32();
  bank.geometry.h = r.u32();
  bank.geometry.w = r.u32();
  bank.geometry.d = r.u32();
  bank.geometry.delta_t = r.u32();
  const std::size_t classes = r.u32();
  r.need_elements(classes, 4);
  for (std::size_t i = 0; i < classes; ++i) bank.classes.push_back(r.i32());
  const std::size_t models = r.u32();
  if (models != expected_models(bank.strategy, classes, bank.grid))
    throw Error(ErrorCode::FormatError, "model bank: " + std::to_string(models) + " models inconsistent with strategy " +
                                            std::string(to_string(bank.strategy)));
  for (std::size_t i = 0; i < models; ++i) {
    SlowFeatureModel m;
    m.strategy = bank.strategy;
    if (const auto c = r.i32(); c >= 0) m.class_label = c;
    if (const auto g = r.i32(); g >= 0) m.region_label = g;
    const bool has_gamma = r.u8() != 0;
    const double gamma = r.f64();
    if (has_gamma) m.gamma = gamma;
    const std::uint32_t kind = r.u32();
    if (kind > static_cast<std::uint32_t>(ExpansionKind::Quadratic)) throw Error(ErrorCode::FormatError, "model bank: unknown expansion");
    m.expansion.kind = static_cast<ExpansionKind>(kind);
    m.expansion.input_dim = r.u32();
    m.expansion.output_dim = r.u32();
    m.pca.mean = read_vector(r);
    m.pca.projection = read_matrix(r);
    m.pca.explained_eigenvalues = read_vector(r);
    m.h0 = read_vector(r);
    m.w = read_matrix(r);
    m.eigenvalues = read_vector(r);
    const auto spec = ExpansionSpec::make(m.expansion.kind, m.expansion.input_dim);
    if (spec.output_dim != m.expansion.output_dim || m.pca.mean.size() != m.pca.in_dim() ||
        m.pca.out_dim() != m.expansion.input_dim || m.h0.size() != m.expansion.output_dim ||
        m.w.rows() != m.expansion.output_dim || m.eigenvalues.size() != m.w.cols())
      throw Error(ErrorCode::FormatError, "model bank: inconsistent dimensions in model " + std::to_string(i));
    bank.models.push_back(std::move(m));
  }
  r.finish();
  return bank;
}

void save_bank(const std::string& path, const ModelBank& bank) { write_file_atomic(path, encode_bank(bank)); }
ModelBank load_bank(const std::string& path) { return decode_bank(read_file(path)); }

// --- SFAF ---

std::vector<std::uint8_t> encode_features(const std::vector<LabeledFeature>& features) {
  Writer w("SFAF");
  w.u32(kFeatureVersion);
  w.count(features.size());
  const std::size_t dim = features.empty() ? 0 : features.front().feature.values.size();
  w.count(dim);
  for (const auto& f : features) {
    if (f.feature.values.size() != dim) throw Error(ErrorCode::InvalidDimension, "feature dimensions differ");
    w.i32(f.label);
    w.u32(f.feature.sequence_id);
    w.u32(f.feature.start_frame);
    w.u8(f.train);
    w.u8(f.feature.normalized);
    w.f64s(f.feature.values);
  }
  return w.take();
}

std::vector<LabeledFeature> decode_features(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes, "SFAF", "feature set");
  const std::uint32_t version = r.u32();
  if (version != kFeatureVersion) throw Error(ErrorCode::UnsupportedVersion, "feature set version " + std::to_string(version));
  const std::size_t count = r.u32();
  const std::size_t dim = r.u32();
  r.need_elements(count, 14 + 8 * dim);
  std::vector<LabeledFeature> out(count);
  for (auto& f : out) {
    f.label = r.i32();
    f.feature.sequence_id = r.u32();
    f.feature.start_frame = r.u32();
    f.train = r.u8() != 0;
    f.feature.normalized = r.u8() != 0;
    f.feature.values = r.f64s(dim);
  }
  r.finish();
  return out;
}

void save_features(const std::string& path, const std::vector<LabeledFeature>& features) {
  write_file_atomic(path, encode_features(features));
}
std::vector<LabeledFeature> load_features(const std::string& path) { return decode_features(read_file(path)); }

// --- SFAC ---

std::vector<std::uint8_t> encode_classifier(const LinearClassifier& clf) {
  Writer w("SFAC");
  w.u32(kClassifierVersion);
  w.count(clf.classes());
  w.count(clf.dim());
  if (clf.labels.size() != clf.classes() || clf.class_names.size() != clf.classes() || clf.biases.size() != clf.classes())
    throw Error(ErrorCode::InvalidInput, "classifier fields disagree on the class count");
  for (auto l : clf.labels) w.i32(l);
  for (const auto& n : clf.class_names) w.str(n);
  w.f64s(clf.weights.data());
  w.f64s(clf.biases);
  return w.take();
}

LinearClassifier decode_classifier(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes, "SFAC", "classifier");
  const std::uint32_t version = r.u32();
  if (version != kClassifierVersion) throw Error(ErrorCode::UnsupportedVersion, "classifier version " + std::to_string(version));
  const std::size_t classes = r.u32();
  const std::size_t dim = r.u32();
  LinearClassifier clf;
  r.need_elements(classes, 4);
  for (std::size_t i = 0; i < classes; ++i) clf.labels.push_back(r.i32());
  for (std::size_t i = 0; i < classes; ++i) clf.class_names.push_back(r.str());
  clf.weights = Matrix(classes, dim, r.f64s(classes * dim));
  clf.biases = r.f64s(classes);
  r.finish();
  return clf;
}

void save_classifier(const std::string& path, const LinearClassifier& clf) {
  write_file_atomic(path, encode_classifier(clf));
}
LinearClassifier load_classifier(const std::string& path) { return decode_classifier(read_file(path)); }

// --- manifest ---

std::vector<DatasetEntry> parse_manifest(const std::string& text) {
  std::vector<DatasetEntry> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    DatasetEntry e;
    std::string split, extra;
    if (!(ls >> e.name >> e.label >> split) || (ls >> extra) || (split != "train" && split != "test"))
      throw Error(ErrorCode::ParseError, "manifest line " + std::to_string(line_no) + ": expected 'name label train|test'");
    e.train = split == "train";
    out.push_back(std::move(e));
  }
  return out;
}

std::string format_manifest(const std::vector<DatasetEntry>& entries) {
  std::string out;
  for (const auto& e : entries) out += e.name + " " + std::to_string(e.label) + " " + (e.train ? "train" : "test") + "\n";
  return out;
}

std::vector<DatasetEntry> load_manifest(const std::string& dir) {
  return parse_manifest(read_text((std::filesystem::path(dir) / kManifestName).string()));
}

FrameSequence load_entry(const std::string& dir, const DatasetEntry& entry) {
  const auto base = std::filesystem::path(dir) / entry.name;
  FrameSequence seq = load_sequence(base.string() + ".sfv");
  const std::string ann = base.string() + ".ann";
  if (std::filesystem::exists(ann)) seq.boxes = load_annotations(ann, seq.frames, seq.height, seq.width);
  return seq;
}

}  // namespace sfa::dataio
