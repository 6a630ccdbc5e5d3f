// Copyright 2026 cllrce contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cllrce/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cllrce::io {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'L', 'R', 'C', 'E', 'A', 'R'};
constexpr std::uint64_t kVersion = 1;
constexpr std::uint64_t kKindFeatures = 0;
constexpr std::uint64_t kKindEmbeddings = 1;
constexpr std::uint64_t kKindCheckpoint = 2;

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  }

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data),
               static_cast<std::streamsize>(n));
  }

  void u64(std::uint64_t value) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) {
      buf[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xff);
    }
    bytes(buf, 8);
  }

  void f64(double value) { u64(std::bit_cast<std::uint64_t>(value)); }

  void text(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }

  // Row-major dump regardless of the in-memory layout.
  void matrix(const Matrix& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (long r = 0; r < m.rows(); ++r) {
      for (long c = 0; c < m.cols(); ++c) {
        f64(m(r, c));
      }
    }
  }

  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open for reading: " + path);
  }

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw std::runtime_error("truncated file: " + path_);
    }
  }

  std::uint64_t u64() {
    unsigned char buf[8];
    bytes(buf, 8);
    std::uint64_t value = 0;
    for (int i = 0; i < 8; ++i) {
      value |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    return value;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string text() {
    const std::uint64_t n = u64();
    std::string s(n, '\0');
    if (n > 0) bytes(s.data(), n);
    return s;
  }

  Matrix matrix() {
    const std::uint64_t rows = u64();
    const std::uint64_t cols = u64();
    Matrix m(static_cast<long>(rows), static_cast<long>(cols));
    for (std::uint64_t r = 0; r < rows; ++r) {
      for (std::uint64_t c = 0; c < cols; ++c) {
        m(static_cast<long>(r), static_cast<long>(c)) = f64();
      }
    }
    return m;
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
};

void write_header(BinaryWriter& writer, std::uint64_t kind) {
  writer.bytes(kMagic, sizeof(kMagic));
  writer.u64(kVersion);
  writer.u64(kind);
}

void read_header(BinaryReader& reader, std::uint64_t expected_kind) {
  char magic[8];
  reader.bytes(magic, sizeof(magic));
  for (int i = 0; i < 8; ++i) {
    if (magic[i] != kMagic[i]) {
      throw std::runtime_error("bad magic in " + reader.path());
    }
  }
  const std::uint64_t version = reader.u64();
  if (version != kVersion) {
    throw std::runtime_error("unsupported archive version in " +
                             reader.path());
  }
  const std::uint64_t kind = reader.u64();
  if (kind != expected_kind) {
    throw std::runtime_error("archive kind mismatch in " + reader.path());
  }
}

struct MetadataLine {
  int speaker_id;
  int style_id;
  int cell_index;
  synthdata::Split split;
};

std::string make_metadata(const std::vector<MetadataLine>& lines) {
  std::ostringstream out;
  for (const auto& line : lines) {
    out << utt_key(line.speaker_id, line.style_id, line.cell_index) << ' '
        << line.speaker_id << ' ' << line.style_id << ' '
        << split_name(line.split) << '\n';
  }
  return out.str();
}

std::vector<MetadataLine> parse_metadata(const std::string& text,
                                         std::size_t expected,
                                         const std::string& path) {
  std::istringstream in(text);
  std::vector<MetadataLine> lines;
  std::string key;
  std::string split_token;
  int speaker = 0;
  int style = 0;
  while (in >> key >> speaker >> style >> split_token) {
    const ParsedKey parsed = parse_key(key);
    if (!parsed.has_cell || parsed.speaker_id != speaker ||
        parsed.style_id != style) {
      throw std::runtime_error("inconsistent metadata line in " + path);
    }
    lines.push_back(
        {speaker, style, parsed.cell_index, split_from_name(split_token)});
  }
  if (lines.size() != expected) {
    throw std::runtime_error("metadata count mismatch in " + path);
  }
  return lines;
}

}  // namespace

std::string utt_key(int speaker_id, int style_id, int cell_index) {
  std::ostringstream out;
  out << 's' << speaker_id << "-y" << style_id << "-u" << cell_index;
  return out.str();
}

std::string enroll_key(int speaker_id, int style_id) {
  std::ostringstream out;
  out << 's' << speaker_id << "-y" << style_id;
  return out.str();
}

ParsedKey parse_key(const std::string& key) {
  ParsedKey parsed;
  int consumed = 0;
  if (std::sscanf(key.c_str(), "s%d-y%d-u%d%n", &parsed.speaker_id,
                  &parsed.style_id, &parsed.cell_index, &consumed) == 3 &&
      static_cast<std::size_t>(consumed) == key.size()) {
    parsed.has_cell = true;
    return parsed;
  }
  if (std::sscanf(key.c_str(), "s%d-y%d%n", &parsed.speaker_id,
                  &parsed.style_id, &consumed) == 2 &&
      static_cast<std::size_t>(consumed) == key.size()) {
    parsed.has_cell = false;
    return parsed;
  }
  throw ContractError("malformed key: " + key);
}

std::string split_name(synthdata::Split split) {
  switch (split) {
    case synthdata::Split::kTrain:
      return "train";
    case synthdata::Split::kEnroll:
      return "enroll";
    case synthdata::Split::kTest:
      return "test";
    case synthdata::Split::kEnrollTest:
      return "enroll_test";
  }
  throw ContractError("unknown split value");
}

synthdata::Split split_from_name(const std::string& name) {
  if (name == "train") return synthdata::Split::kTrain;
  if (name == "enroll") return synthdata::Split::kEnroll;
  if (name == "test") return synthdata::Split::kTest;
  if (name == "enroll_test") return synthdata::Split::kEnrollTest;
  throw ContractError("unknown split name: " + name);
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_feature_archive(const std::string& path,
                           const std::vector<synthdata::Utterance>& corpus) {
  BinaryWriter writer(path);
  write_header(writer, kKindFeatures);
  writer.u64(corpus.size());
  std::vector<MetadataLine> lines;
  lines.reserve(corpus.size());
  for (const auto& utt : corpus) {
    lines.push_back({utt.speaker_id, utt.style_id, utt.cell_index, utt.split});
  }
  writer.text(make_metadata(lines));
  for (const auto& utt : corpus) {
    writer.matrix(utt.features);
  }
  writer.close();
}

std::vector<synthdata::Utterance> read_feature_archive(
    const std::string& path) {
  BinaryReader reader(path);
  read_header(reader, kKindFeatures);
  const std::uint64_t n = reader.u64();
  const auto lines = parse_metadata(reader.text(), n, path);
  std::vector<synthdata::Utterance> corpus;
  corpus.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    synthdata::Utterance utt;
    utt.speaker_id = lines[i].speaker_id;
    utt.style_id = lines[i].style_id;
    utt.cell_index = lines[i].cell_index;
    utt.split = lines[i].split;
    utt.features = reader.matrix();
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

void write_embedding_archive(
    const std::string& path,
    const std::vector<scoring::EmbeddedUtterance>& utts) {
  if (utts.empty()) throw ContractError("no embeddings to write");
  BinaryWriter writer(path);
  write_header(writer, kKindEmbeddings);
  writer.u64(utts.size());
  std::vector<MetadataLine> lines;
  lines.reserve(utts.size());
  for (const auto& utt : utts) {
    lines.push_back({utt.speaker_id, utt.style_id, utt.cell_index, utt.split});
  }
  writer.text(make_metadata(lines));
  writer.u64(static_cast<std::uint64_t>(utts.front().embedding.size()));
  for (const auto& utt : utts) {
    if (utt.embedding.size() != utts.front().embedding.size()) {
      throw ContractError("embeddings differ in dimension");
    }
    for (long i = 0; i < utt.embedding.size(); ++i) {
      writer.f64(utt.embedding(i));
    }
  }
  writer.close();
}

std::vector<scoring::EmbeddedUtterance> read_embedding_archive(
    const std::string& path) {
  BinaryReader reader(path);
  read_header(reader, kKindEmbeddings);
  const std::uint64_t n = reader.u64();
  const auto lines = parse_metadata(reader.text(), n, path);
  const std::uint64_t dim = reader.u64();
  std::vector<scoring::EmbeddedUtterance> utts;
  utts.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    scoring::EmbeddedUtterance utt;
    utt.speaker_id = lines[i].speaker_id;
    utt.style_id = lines[i].style_id;
    utt.cell_index = lines[i].cell_index;
    utt.split = lines[i].split;
    utt.embedding = Vector(static_cast<long>(dim));
    for (std::uint64_t d = 0; d < dim; ++d) {
      utt.embedding(static_cast<long>(d)) = reader.f64();
    }
    utts.push_back(std::move(utt));
  }
  return utts;
}

void write_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  model::check_config(checkpoint.config);
  BinaryWriter writer(path);
  write_header(writer, kKindCheckpoint);
  const auto& config = checkpoint.config;
  writer.u64(static_cast<std::uint64_t>(config.feature_dim));
  writer.u64(config.frame_layer_dims.size());
  for (int d : config.frame_layer_dims) {
    writer.u64(static_cast<std::uint64_t>(d));
  }
  writer.u64(static_cast<std::uint64_t>(config.embedding_dim));
  writer.u64(static_cast<std::uint64_t>(config.n_speakers));
  writer.u64(config.pooling == model::Pooling::kAttention ? 1 : 0);
  writer.u64(config.attention.has_value()
                 ? static_cast<std::uint64_t>(config.attention->attention_dim)
                 : 0);
  writer.u64(config.attention.has_value()
                 ? static_cast<std::uint64_t>(config.attention->condition_dim)
                 : 0);
  writer.u64(static_cast<std::uint64_t>(checkpoint.steps));

  const Vector flat = model::pack(config, checkpoint.params);
  writer.u64(static_cast<std::uint64_t>(flat.size()));
  for (long i = 0; i < flat.size(); ++i) {
    writer.f64(flat(i));
  }
  writer.close();
}

Checkpoint read_checkpoint(const std::string& path) {
  BinaryReader reader(path);
  read_header(reader, kKindCheckpoint);
  Checkpoint checkpoint;
  auto& config = checkpoint.config;
  config.feature_dim = static_cast<int>(reader.u64());
  const std::uint64_t n_layers = reader.u64();
  config.frame_layer_dims.clear();
  for (std::uint64_t i = 0; i < n_layers; ++i) {
    config.frame_layer_dims.push_back(static_cast<int>(reader.u64()));
  }
  config.embedding_dim = static_cast<int>(reader.u64());
  config.n_speakers = static_cast<int>(reader.u64());
  const bool attention = reader.u64() == 1;
  const int attention_dim = static_cast<int>(reader.u64());
  const int condition_dim = static_cast<int>(reader.u64());
  if (attention) {
    config.pooling = model::Pooling::kAttention;
    config.attention = model::AttentionConfig{attention_dim, condition_dim};
  } else {
    config.pooling = model::Pooling::kStats;
  }
  checkpoint.steps = static_cast<std::int64_t>(reader.u64());

  const std::uint64_t n_params = reader.u64();
  if (static_cast<long>(n_params) != model::param_count(config)) {
    throw std::runtime_error("checkpoint parameter count mismatch in " +
                             path);
  }
  Vector flat(static_cast<long>(n_params));
  for (std::uint64_t i = 0; i < n_params; ++i) {
    flat(static_cast<long>(i)) = reader.f64();
  }
  checkpoint.params = model::zero_grads(config);
  model::unpack(config, flat, checkpoint.params);
  return checkpoint;
}

void write_trial_list(const std::string& path,
                      const std::vector<TrialRecord>& trials) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& trial : trials) {
    out << trial.enroll_key << ' ' << trial.test_key << ' '
        << (trial.is_target ? "target" : "nontarget") << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<TrialRecord> read_trial_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<TrialRecord> trials;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    TrialRecord trial;
    std::string label;
    if (!(fields >> trial.enroll_key >> trial.test_key >> label) ||
        (label != "target" && label != "nontarget")) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed trial line");
    }
    trial.is_target = label == "target";
    trials.push_back(std::move(trial));
  }
  return trials;
}

void write_score_file(const std::string& path,
                      const std::vector<ScoreRecord>& scores) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& record : scores) {
    out << record.enroll_key << ' ' << record.test_key << ' '
        << format_double(record.score) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ScoreRecord> read_score_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<ScoreRecord> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    ScoreRecord record;
    if (!(fields >> record.enroll_key >> record.test_key >> record.score)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed score line");
    }
    scores.push_back(std::move(record));
  }
  return scores;
}

}  // namespace cllrce::io
