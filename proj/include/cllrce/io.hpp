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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cllrce/model.hpp"
#include "cllrce/scoring.hpp"
#include "cllrce/synthdata.hpp"

namespace cllrce::io {

// Utterance and enrollment keys: "s<speaker>-y<style>-u<index>" and
// "s<speaker>-y<style>".
std::string utt_key(int speaker_id, int style_id, int cell_index);
std::string enroll_key(int speaker_id, int style_id);

struct ParsedKey {
  int speaker_id = 0;
  int style_id = 0;
  int cell_index = 0;
  bool has_cell = false;  // true for utterance keys
};

ParsedKey parse_key(const std::string& key);

std::string split_name(synthdata::Split split);
synthdata::Split split_from_name(const std::string& name);

/// Lossless 64-bit float formatting (17 significant digits).
std::string format_double(double value);

// Binary container: 8-byte magic "CLLRCEAR", little-endian u64 version and
// kind, then a kind-specific body of u64 counts, a UTF-8 metadata block,
// and row-major IEEE-754 doubles. Identical in-memory objects serialize to
// identical bytes.

void write_feature_archive(const std::string& path,
                           const std::vector<synthdata::Utterance>& corpus);
std::vector<synthdata::Utterance> read_feature_archive(
    const std::string& path);

void write_embedding_archive(
    const std::string& path,
    const std::vector<scoring::EmbeddedUtterance>& utts);
std::vector<scoring::EmbeddedUtterance> read_embedding_archive(
    const std::string& path);

struct Checkpoint {
  model::ModelConfig config;
  model::ModelParams params;
  std::int64_t steps = 0;
};

void write_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::string& path);

// Trial list: one trial per line, "<enroll_key> <test_key> target|nontarget"
// (whitespace separated, UTF-8, LF endings).
struct TrialRecord {
  std::string enroll_key;
  std::string test_key;
  bool is_target = false;
};

void write_trial_list(const std::string& path,
                      const std::vector<TrialRecord>& trials);
std::vector<TrialRecord> read_trial_list(const std::string& path);

// Score file: "<enroll_key> <test_key> <score>" with 17-digit scores.
struct ScoreRecord {
  std::string enroll_key;
  std::string test_key;
  double score = 0.0;
};

void write_score_file(const std::string& path,
                      const std::vector<ScoreRecord>& scores);
std::vector<ScoreRecord> read_score_file(const std::string& path);

}  // namespace cllrce::io
