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

#include "cllrce/io.hpp"
#include "cllrce/metrics.hpp"
#include "cllrce/model.hpp"
#include "cllrce/scoring.hpp"
#include "cllrce/synthdata.hpp"
#include "cllrce/trainer.hpp"

namespace cllrce::experiment {

struct CorpusConfig {
  synthdata::CorpusSpec spec;
  double enroll_fraction = 0.25;
  bool allow_single_utterance_reuse = false;
};

/// One experiment, as read from a JSON config file. Unknown keys are
/// rejected; missing keys fall back to the defaults below. feature_dim and
/// n_speakers of the model always follow the corpus section.
struct ExperimentConfig {
  CorpusConfig corpus;
  model::ModelConfig model;
  trainer::TrainConfig train;
  scoring::BackendKind backend = scoring::BackendKind::kCosine;
  std::string output_dir = "out";
};

ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

const char* loss_name(trainer::LossKind kind);
trainer::LossKind loss_from_name(const std::string& name);
const char* pooling_name(model::Pooling pooling);
const char* backend_name(scoring::BackendKind kind);
scoring::BackendKind backend_from_name(const std::string& name);

/// Seeded generation plus split assignment (split seed derived from the
/// corpus seed).
std::vector<synthdata::Utterance> make_corpus(const CorpusConfig& config);

std::vector<scoring::EmbeddedUtterance> embed_corpus(
    const model::ModelConfig& config, const model::ModelParams& params,
    const std::vector<synthdata::Utterance>& corpus);

/// One evaluated condition, serialized as a JSON record.
struct EvalRecord {
  std::string system = "system";
  int enroll_style = -1;
  int test_style = -1;
  double eer = 0.0;
  double min_dcf = 0.0;
  double cllr = 0.0;
  double eer_threshold = 0.0;
  std::int64_t n_target = 0;
  std::int64_t n_nontarget = 0;
};

/// A McNemar comparison of two systems on one condition.
struct CompareRecord {
  std::string system_a;
  std::string system_b;
  int enroll_style = -1;
  int test_style = -1;
  std::int64_t n01 = 0;
  std::int64_t n10 = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  std::string method;
  bool significant = false;  // p < 0.05
};

std::string eval_record_to_json(const EvalRecord& record);
EvalRecord eval_record_from_json(const std::string& text);
std::string compare_record_to_json(const CompareRecord& record);
CompareRecord compare_record_from_json(const std::string& text);

/// Per-epoch history as CSV (no timing data, so re-runs are byte-identical).
std::string history_to_csv(const trainer::TrainHistory& history);

/// Scores a trial list against an embedding archive; unresolved keys raise
/// a contract error naming the key.
std::vector<io::ScoreRecord> score_trial_records(
    const std::vector<io::TrialRecord>& trials,
    const std::vector<scoring::EmbeddedUtterance>& utts,
    scoring::BackendKind backend);

/// Score-file evaluation. Target/non-target labels are recovered from the
/// speaker fields of the enroll and test keys; styles are recorded when
/// they are homogeneous across the file.
EvalRecord evaluate_score_records(const std::vector<io::ScoreRecord>& records,
                                  const metrics::DcfParams& params,
                                  const std::string& system);

/// McNemar over two systems' score files on the same trial list, deciding
/// each trial at the owning system's EER threshold.
CompareRecord compare_score_records(
    const std::vector<io::TrialRecord>& trials,
    const std::vector<io::ScoreRecord>& scores_a,
    const std::vector<io::ScoreRecord>& scores_b, const std::string& name_a,
    const std::string& name_b);

struct ReportTable {
  std::string text;  // aligned, human readable
  std::string csv;   // long format, plot ready
};

/// Style-grid report: one row per (enroll style, test style), one column
/// group per system, significance marker against the named baseline.
ReportTable render_report(const std::vector<EvalRecord>& records,
                          const std::vector<CompareRecord>& compares,
                          const std::string& baseline);

// Stage functions behind the CLI subcommands. Every stage is a pure
// function of its input files plus config, so identical inputs reproduce
// byte-identical outputs.
void stage_synth(const ExperimentConfig& config, const std::string& out_path);
void stage_train(const ExperimentConfig& config,
                 const std::string& corpus_path, trainer::LossKind loss,
                 const std::string& checkpoint_path,
                 const std::string& history_path);
void stage_embed(const std::string& checkpoint_path,
                 const std::string& corpus_path, const std::string& out_path);
void stage_trials(const std::string& embeddings_path, int enroll_style,
                  int test_style, const std::string& out_path);
void stage_score(const std::string& embeddings_path,
                 const std::string& trials_path,
                 scoring::BackendKind backend, const std::string& out_path);
EvalRecord stage_eval(const std::string& score_path,
                      const metrics::DcfParams& params,
                      const std::string& system);
CompareRecord stage_compare(const std::string& scores_a_path,
                            const std::string& scores_b_path,
                            const std::string& trials_path,
                            const std::string& name_a,
                            const std::string& name_b);

}  // namespace cllrce::experiment
