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

#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "cllrce/experiment.hpp"
#include "oracles.hpp"

using namespace cllrce;

namespace {

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "cllrce_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("key codec round trips and rejects junk") {
  CHECK(io::utt_key(12, 3, 0) == "s12-y3-u0");
  CHECK(io::enroll_key(7, 1) == "s7-y1");
  const io::ParsedKey utt = io::parse_key("s12-y3-u4");
  CHECK(utt.speaker_id == 12);
  CHECK(utt.style_id == 3);
  CHECK(utt.cell_index == 4);
  CHECK(utt.has_cell);
  const io::ParsedKey enroll = io::parse_key("s7-y1");
  CHECK_FALSE(enroll.has_cell);
  CHECK_THROWS_AS(io::parse_key("bogus"), ContractError);
  CHECK_THROWS_AS(io::parse_key("s7-y1-u2-x9"), ContractError);
}

TEST_CASE("feature archive round trips bit-exactly") {
  synthdata::CorpusSpec spec;
  spec.n_speakers = 3;
  spec.n_styles = 2;
  spec.utts_per_speaker_style = 2;
  spec.frames_min = 5;
  spec.frames_max = 9;
  spec.seed = 31;
  auto corpus = synthdata::generate_corpus(spec);
  synthdata::split_corpus(corpus, 0.5, 3, false);

  const std::string path = temp_path("features.bin");
  io::write_feature_archive(path, corpus);
  const auto restored = io::read_feature_archive(path);
  REQUIRE(restored.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(restored[i].speaker_id == corpus[i].speaker_id);
    CHECK(restored[i].style_id == corpus[i].style_id);
    CHECK(restored[i].cell_index == corpus[i].cell_index);
    CHECK(restored[i].split == corpus[i].split);
    CHECK((restored[i].features.array() == corpus[i].features.array()).all());
  }

  // Re-writing reproduces the same bytes.
  const std::string again = temp_path("features2.bin");
  io::write_feature_archive(again, corpus);
  CHECK(slurp(path) == slurp(again));
}

TEST_CASE("embedding archive round trips") {
  std::mt19937_64 rng(37);
  std::vector<scoring::EmbeddedUtterance> utts;
  for (int i = 0; i < 5; ++i) {
    scoring::EmbeddedUtterance utt;
    utt.embedding = oracles::random_matrix(rng, 8, 1, -3, 3).col(0);
    utt.speaker_id = i % 3;
    utt.style_id = i % 2;
    utt.cell_index = i;
    utt.split = synthdata::Split::kTest;
    utts.push_back(std::move(utt));
  }
  const std::string path = temp_path("embeddings.bin");
  io::write_embedding_archive(path, utts);
  const auto restored = io::read_embedding_archive(path);
  REQUIRE(restored.size() == utts.size());
  for (std::size_t i = 0; i < utts.size(); ++i) {
    CHECK((restored[i].embedding.array() == utts[i].embedding.array()).all());
    CHECK(restored[i].split == utts[i].split);
  }
}

TEST_CASE("checkpoint round trips params, config, and step counter") {
  model::ModelConfig config;
  config.feature_dim = 6;
  config.frame_layer_dims = {8, 7};
  config.embedding_dim = 5;
  config.n_speakers = 4;
  config.pooling = model::Pooling::kAttention;
  config.attention = model::AttentionConfig{6, 3};

  io::Checkpoint checkpoint;
  checkpoint.config = config;
  checkpoint.params = model::init_params(config, 11);
  checkpoint.steps = 321;

  const std::string path = temp_path("ckpt.bin");
  io::write_checkpoint(path, checkpoint);
  const io::Checkpoint restored = io::read_checkpoint(path);
  CHECK(restored.steps == 321);
  CHECK(restored.config.frame_layer_dims == config.frame_layer_dims);
  CHECK(restored.config.pooling == model::Pooling::kAttention);
  CHECK(restored.config.attention->attention_dim == 6);
  const Vector a = model::pack(config, checkpoint.params);
  const Vector b = model::pack(restored.config, restored.params);
  CHECK((a.array() == b.array()).all());
}

TEST_CASE("trial list and score file round trips") {
  const std::vector<io::TrialRecord> trials = {
      {"s0-y0", "s0-y1-u2", true},
      {"s0-y0", "s1-y1-u0", false},
  };
  const std::string trial_path = temp_path("trials.txt");
  io::write_trial_list(trial_path, trials);
  const auto restored = io::read_trial_list(trial_path);
  REQUIRE(restored.size() == 2);
  CHECK(restored[0].is_target);
  CHECK_FALSE(restored[1].is_target);
  CHECK(restored[1].test_key == "s1-y1-u0");

  std::mt19937_64 rng(41);
  std::vector<io::ScoreRecord> scores;
  for (int i = 0; i < 20; ++i) {
    scores.push_back({"s0-y0", io::utt_key(i, 1, 0),
                      oracles::uniform(rng, -1e3, 1e3) / 7.0});
  }
  scores.push_back({"s0-y0", "s99-y1-u0", 1.0 / 3.0});
  const std::string score_path = temp_path("scores.txt");
  io::write_score_file(score_path, scores);
  const auto restored_scores = io::read_score_file(score_path);
  REQUIRE(restored_scores.size() == scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    CHECK(restored_scores[i].score == scores[i].score);  // lossless 17 digits
  }

  std::ofstream bad(temp_path("bad_trials.txt"));
  bad << "s0-y0 s0-y1-u0 maybe\n";
  bad.close();
  CHECK_THROWS_AS(io::read_trial_list(temp_path("bad_trials.txt")),
                  std::runtime_error);
}

}  // TEST_SUITE

TEST_SUITE("experiment") {

TEST_CASE("config parsing applies defaults and validates") {
  const auto config = experiment::parse_config_text("{}");
  CHECK(config.corpus.spec.n_speakers == 50);
  CHECK(config.corpus.spec.sigma_style == 0.6);
  CHECK(config.model.embedding_dim == 32);
  CHECK(config.model.n_speakers == 50);
  CHECK(config.model.feature_dim == 24);
  CHECK(config.train.batch_size == 128);
  CHECK(config.train.epochs == 100);
  CHECK(config.backend == scoring::BackendKind::kCosine);

  const auto parsed = experiment::parse_config_text(R"({
    "corpus": {"n_speakers": 8, "feature_dim": 12, "latent_dim": 4},
    "model": {"pooling": "attn", "attention_dim": 16, "condition_dim": 4,
              "frame_layer_dims": [24]},
    "train": {"loss": "cllr", "epochs": 2, "batch_size": 16},
    "scoring": {"backend": "twocov"},
    "output_dir": "exp1"
  })");
  CHECK(parsed.corpus.spec.n_speakers == 8);
  CHECK(parsed.model.n_speakers == 8);
  CHECK(parsed.model.feature_dim == 12);
  CHECK(parsed.model.pooling == model::Pooling::kAttention);
  CHECK(parsed.model.attention->attention_dim == 16);
  CHECK(parsed.train.loss_kind == trainer::LossKind::kCllr);
  CHECK(parsed.backend == scoring::BackendKind::kTwoCov);
  CHECK(parsed.output_dir == "exp1");
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
  CHECK_THROWS_AS(experiment::parse_config_text(R"({"corpuz": {}})"),
                  ContractError);
  CHECK_THROWS_AS(
      experiment::parse_config_text(R"({"corpus": {"speakers": 5}})"),
      ContractError);
  CHECK_THROWS_AS(
      experiment::parse_config_text(R"({"train": {"loss": "mse"}})"),
      ContractError);
  CHECK_THROWS_AS(
      experiment::parse_config_text(
          R"({"model": {"pooling": "stats", "attention_dim": 8}})"),
      ContractError);
  CHECK_THROWS_AS(
      experiment::parse_config_text(R"({"corpus": {"enroll_fraction": 1.5}})"),
      ContractError);
  CHECK_THROWS_AS(experiment::parse_config_text("not json"), ContractError);
}

TEST_CASE("eval and compare records survive JSON round trips") {
  experiment::EvalRecord record;
  record.system = "cllr_ce";
  record.enroll_style = 1;
  record.test_style = 2;
  record.eer = 0.03125;
  record.min_dcf = 0.2;
  record.cllr = 0.91;
  record.eer_threshold = 0.125;
  record.n_target = 50;
  record.n_nontarget = 2450;
  const experiment::EvalRecord back =
      experiment::eval_record_from_json(experiment::eval_record_to_json(record));
  CHECK(back.system == record.system);
  CHECK(back.eer == record.eer);
  CHECK(back.n_nontarget == record.n_nontarget);

  experiment::CompareRecord compare;
  compare.system_a = "ce";
  compare.system_b = "cllr_ce";
  compare.n01 = 4;
  compare.n10 = 11;
  compare.statistic = 2.4;
  compare.p_value = 0.118;
  compare.method = "exact-binomial";
  compare.significant = false;
  const experiment::CompareRecord back2 = experiment::compare_record_from_json(
      experiment::compare_record_to_json(compare));
  CHECK(back2.system_b == "cllr_ce");
  CHECK(back2.p_value == compare.p_value);
}

TEST_CASE("evaluate_score_records infers labels from keys") {
  std::vector<io::ScoreRecord> records;
  std::mt19937_64 rng(43);
  for (int speaker = 0; speaker < 6; ++speaker) {
    for (int test = 0; test < 6; ++test) {
      records.push_back({io::enroll_key(speaker, 0),
                         io::utt_key(test, 1, 0),
                         speaker == test ? oracles::uniform(rng, 1, 2)
                                         : oracles::uniform(rng, -2, -1)});
    }
  }
  const experiment::EvalRecord record =
      experiment::evaluate_score_records(records, {}, "sys");
  CHECK(record.n_target == 6);
  CHECK(record.n_nontarget == 30);
  CHECK(record.eer == 0.0);
  CHECK(record.min_dcf == 0.0);
  CHECK(record.enroll_style == 0);
  CHECK(record.test_style == 1);
}

TEST_CASE("compare_score_records: self comparison is not significant") {
  std::vector<io::TrialRecord> trials;
  std::vector<io::ScoreRecord> scores;
  std::mt19937_64 rng(47);
  for (int speaker = 0; speaker < 5; ++speaker) {
    for (int test = 0; test < 5; ++test) {
      const std::string ekey = io::enroll_key(speaker, 0);
      const std::string tkey = io::utt_key(test, 1, 0);
      trials.push_back({ekey, tkey, speaker == test});
      scores.push_back({ekey, tkey, oracles::uniform(rng, -1, 1)});
    }
  }
  const experiment::CompareRecord record =
      experiment::compare_score_records(trials, scores, scores, "a", "a");
  CHECK(record.p_value == 1.0);
  CHECK_FALSE(record.significant);
  CHECK(record.n01 == 0);
  CHECK(record.n10 == 0);

  auto missing = scores;
  missing.pop_back();
  CHECK_THROWS_AS(
      experiment::compare_score_records(trials, missing, scores, "a", "b"),
      ContractError);
}

TEST_CASE("render_report emits one row per condition") {
  std::vector<experiment::EvalRecord> records;
  for (const std::string system : {"ce", "cllr_ce"}) {
    for (int enroll = 0; enroll < 2; ++enroll) {
      for (int test = 0; test < 2; ++test) {
        experiment::EvalRecord r;
        r.system = system;
        r.enroll_style = enroll;
        r.test_style = test;
        r.eer = system == "ce" ? 0.10 : 0.08;
        r.min_dcf = 0.5;
        r.cllr = 0.9;
        r.n_target = 10;
        r.n_nontarget = 90;
        records.push_back(r);
      }
    }
  }
  std::vector<experiment::CompareRecord> compares;
  experiment::CompareRecord c;
  c.system_a = "ce";
  c.system_b = "cllr_ce";
  c.enroll_style = 0;
  c.test_style = 1;
  c.p_value = 0.01;
  c.significant = true;
  compares.push_back(c);

  const experiment::ReportTable table =
      experiment::render_report(records, compares, "ce");
  CHECK(table.text.find("cllr_ce") != std::string::npos);
  CHECK(table.text.find("*") != std::string::npos);
  // Header and 4 condition rows.
  CHECK(std::count(table.csv.begin(), table.csv.end(), '\n') == 1 + 8);
  CHECK(table.csv.rfind("system,enroll_style", 0) == 0);

  CHECK_THROWS_AS(experiment::render_report(records, compares, "nope"),
                  ContractError);
}

TEST_CASE("history csv is timing-free") {
  trainer::TrainHistory history;
  history.mean_loss = {1.5, 1.2};
  history.accuracy = {0.5, 0.75};
  history.wall_time_seconds = 123.0;
  const std::string csv = experiment::history_to_csv(history);
  CHECK(csv == "epoch,mean_loss,accuracy\n1,1.5,0.5\n2,1.2,0.75\n");
}

}  // TEST_SUITE
