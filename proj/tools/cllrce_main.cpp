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

// Command-line driver for the synthetic speaker-verification experiments:
// corpus synthesis, training, embedding extraction, trial scoring,
// evaluation, system comparison, and report generation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cllrce/experiment.hpp"

namespace {

using namespace cllrce;

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

experiment::ExperimentConfig load_config(const std::string& path,
                                         std::optional<std::uint64_t> seed,
                                         const std::string& pooling) {
  experiment::ExperimentConfig config =
      path.empty() ? experiment::parse_config_text("{}")
                   : experiment::load_config_file(path);
  if (seed.has_value()) {
    config.corpus.spec.seed = *seed;
    config.train.seed = *seed;
  }
  if (!pooling.empty()) {
    if (pooling == "stats") {
      config.model.pooling = model::Pooling::kStats;
      config.model.attention.reset();
    } else if (pooling == "attn") {
      config.model.pooling = model::Pooling::kAttention;
      if (!config.model.attention.has_value()) {
        config.model.attention = model::AttentionConfig{};
      }
    } else {
      throw ContractError("unknown pooling: " + pooling);
    }
  }
  return config;
}

struct RunArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::string systems = "ce,cllr_ce";
  std::string backend;
  std::string pooling;
  std::optional<std::uint64_t> seed;
  double p_target = 0.01;
};

// Full pipeline: synth -> per system (train, embed) -> per style pair
// (trials, score, eval, compare vs the first system) -> report.
int run_experiment(const RunArgs& args) {
  experiment::ExperimentConfig config =
      load_config(args.config_path, args.seed, args.pooling);
  if (!args.backend.empty()) {
    config.backend = experiment::backend_from_name(args.backend);
  }

  std::vector<trainer::LossKind> systems;
  std::stringstream list(args.systems);
  std::string token;
  while (std::getline(list, token, ',')) {
    if (!token.empty()) systems.push_back(experiment::loss_from_name(token));
  }
  require(!systems.empty(), "no systems requested");

  namespace fs = std::filesystem;
  const fs::path out_dir =
      args.out_dir.empty() ? fs::path(config.output_dir)
                           : fs::path(args.out_dir);
  fs::create_directories(out_dir);

  const std::string features_path = (out_dir / "features.bin").string();
  experiment::stage_synth(config, features_path);
  std::cout << "synth -> " << features_path << "\n";

  metrics::DcfParams dcf;
  dcf.p_target = args.p_target;

  struct Condition {
    int enroll_style;
    int test_style;
    std::string trials_path;
  };
  std::vector<Condition> conditions;
  std::vector<experiment::EvalRecord> eval_records;
  std::vector<experiment::CompareRecord> compare_records;
  const std::string baseline = experiment::loss_name(systems.front());

  bool trials_ready = false;
  for (const trainer::LossKind loss : systems) {
    const std::string name = experiment::loss_name(loss);
    const fs::path system_dir = out_dir / name;
    fs::create_directories(system_dir);
    const std::string checkpoint = (system_dir / "checkpoint.bin").string();
    const std::string history = (system_dir / "history.csv").string();
    const std::string embeddings = (system_dir / "embeddings.bin").string();

    experiment::stage_train(config, features_path, loss, checkpoint,
                            history);
    std::cout << "train " << name << " -> " << checkpoint << "\n";
    experiment::stage_embed(checkpoint, features_path, embeddings);
    std::cout << "embed " << name << " -> " << embeddings << "\n";

    if (!trials_ready) {
      // Trial lists depend only on the corpus splits; build them once.
      for (int enroll = 0; enroll < config.corpus.spec.n_styles; ++enroll) {
        for (int test = 0; test < config.corpus.spec.n_styles; ++test) {
          const std::string trials_path =
              (out_dir / ("trials_e" + std::to_string(enroll) + "_t" +
                          std::to_string(test) + ".txt"))
                  .string();
          try {
            experiment::stage_trials(embeddings, enroll, test, trials_path);
          } catch (const ContractError&) {
            continue;  // no usable trials for this pair
          }
          bool has_target = false;
          bool has_nontarget = false;
          for (const auto& trial : io::read_trial_list(trials_path)) {
            (trial.is_target ? has_target : has_nontarget) = true;
          }
          if (has_target && has_nontarget) {
            conditions.push_back({enroll, test, trials_path});
          }
        }
      }
      trials_ready = true;
    }

    for (const Condition& condition : conditions) {
      const std::string suffix =
          "_e" + std::to_string(condition.enroll_style) + "_t" +
          std::to_string(condition.test_style);
      const std::string scores =
          (system_dir / ("scores" + suffix + ".txt")).string();
      experiment::stage_score(embeddings, condition.trials_path,
                              config.backend, scores);
      experiment::EvalRecord record =
          experiment::stage_eval(scores, dcf, name);
      record.enroll_style = condition.enroll_style;
      record.test_style = condition.test_style;
      write_text((system_dir / ("eval" + suffix + ".json")).string(),
                 experiment::eval_record_to_json(record));
      eval_records.push_back(record);

      if (name != baseline) {
        const std::string baseline_scores =
            (out_dir / baseline / ("scores" + suffix + ".txt")).string();
        experiment::CompareRecord compare = experiment::stage_compare(
            baseline_scores, scores, condition.trials_path, baseline, name);
        write_text((out_dir / ("compare_" + name + suffix + ".json"))
                       .string(),
                   experiment::compare_record_to_json(compare));
        compare_records.push_back(compare);
      }
    }
    std::cout << "score+eval " << name << " over " << conditions.size()
              << " conditions\n";
  }

  const experiment::ReportTable table =
      experiment::render_report(eval_records, compare_records, baseline);
  write_text((out_dir / "report.txt").string(), table.text);
  write_text((out_dir / "report.csv").string(), table.csv);
  std::cout << "report -> " << (out_dir / "report.txt").string() << "\n\n";
  std::cout << table.text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Speaker-verification experiments with CE, Cllr, and CllrCE training "
      "losses on a synthetic multi-style corpus"};
  app.require_subcommand(1);

  std::string config_path;
  std::string corpus_path;
  std::string checkpoint_path;
  std::string embeddings_path;
  std::string trials_path;
  std::string scores_path;
  std::string scores_b_path;
  std::string out_path;
  std::string history_path;
  std::string loss;
  std::string pooling;
  std::string backend = "cosine";
  std::string system_name = "system";
  std::string name_a = "a";
  std::string name_b = "b";
  std::string baseline;
  std::vector<std::string> record_paths;
  std::vector<std::string> compare_paths;
  std::string out_table;
  std::string out_csv;
  int enroll_style = 0;
  int test_style = 0;
  double p_target = 0.01;
  double c_miss = 1.0;
  double c_fa = 1.0;
  std::optional<std::uint64_t> seed;
  RunArgs run_args;

  auto* synth = app.add_subcommand("synth", "Generate a feature archive");
  synth->add_option("--config", config_path, "experiment config (JSON)");
  synth->add_option("--out", out_path, "output feature archive")->required();
  synth->add_option("--seed", seed, "override the corpus seed");

  auto* train = app.add_subcommand("train", "Train an embedding extractor");
  train->add_option("--config", config_path, "experiment config (JSON)");
  train->add_option("--corpus", corpus_path, "feature archive")->required();
  train->add_option("--loss", loss, "ce|cllr|cllr_ce (overrides config)");
  train->add_option("--pooling", pooling, "stats|attn (overrides config)");
  train->add_option("--seed", seed, "override the training seed");
  train->add_option("--out", out_path, "output checkpoint")->required();
  train->add_option("--history", history_path, "per-epoch history CSV");

  auto* embed = app.add_subcommand("embed", "Extract embeddings");
  embed->add_option("--checkpoint", checkpoint_path, "model checkpoint")
      ->required();
  embed->add_option("--corpus", corpus_path, "feature archive")->required();
  embed->add_option("--out", out_path, "output embedding archive")
      ->required();

  auto* trials = app.add_subcommand("trials", "Build a style-pair trial list");
  trials->add_option("--embeddings", embeddings_path, "embedding archive")
      ->required();
  trials->add_option("--enroll-style", enroll_style, "enrollment style id")
      ->required();
  trials->add_option("--test-style", test_style, "test style id")->required();
  trials->add_option("--out", out_path, "output trial list")->required();

  auto* score = app.add_subcommand("score", "Score a trial list");
  score->add_option("--embeddings", embeddings_path, "embedding archive")
      ->required();
  score->add_option("--trials", trials_path, "trial list")->required();
  score->add_option("--backend", backend, "cosine|twocov");
  score->add_option("--out", out_path, "output score file")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a score file");
  eval->add_option("--scores", scores_path, "score file")->required();
  eval->add_option("--p-target", p_target, "target prior (default 0.01)");
  eval->add_option("--c-miss", c_miss, "miss cost");
  eval->add_option("--c-fa", c_fa, "false-alarm cost");
  eval->add_option("--system", system_name, "system label for the record");
  eval->add_option("--out", out_path, "also write the JSON record here");

  auto* compare = app.add_subcommand(
      "compare", "McNemar comparison of two systems on the same trials");
  compare->add_option("--scores-a", scores_path, "score file A")->required();
  compare->add_option("--scores-b", scores_b_path, "score file B")
      ->required();
  compare->add_option("--trials", trials_path, "trial list")->required();
  compare->add_option("--name-a", name_a, "label for system A");
  compare->add_option("--name-b", name_b, "label for system B");
  compare->add_option("--out", out_path, "also write the JSON record here");

  auto* report = app.add_subcommand(
      "report", "Aggregate eval records into a style-grid table");
  report->add_option("--records", record_paths, "eval record JSON files")
      ->required()
      ->expected(-1);
  report->add_option("--compare", compare_paths,
                     "McNemar record JSON files for significance markers");
  report->add_option("--baseline", baseline, "baseline system name");
  report->add_option("--out-table", out_table, "write the text table here");
  report->add_option("--out-csv", out_csv, "write the CSV here");

  auto* run = app.add_subcommand("run", "Full pipeline from a config");
  run->add_option("--config", run_args.config_path,
                  "experiment config (JSON)");
  run->add_option("--out-dir", run_args.out_dir, "output directory");
  run->add_option("--systems", run_args.systems,
                  "comma-separated losses; first is the baseline");
  run->add_option("--backend", run_args.backend, "cosine|twocov");
  run->add_option("--pooling", run_args.pooling, "stats|attn");
  run->add_option("--seed", run_args.seed, "override corpus+train seeds");
  run->add_option("--p-target", run_args.p_target, "target prior");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      experiment::stage_synth(load_config(config_path, seed, ""), out_path);
    } else if (*train) {
      const experiment::ExperimentConfig config =
          load_config(config_path, seed, pooling);
      const trainer::LossKind kind = loss.empty()
                                         ? config.train.loss_kind
                                         : experiment::loss_from_name(loss);
      experiment::stage_train(config, corpus_path, kind, out_path,
                              history_path);
    } else if (*embed) {
      experiment::stage_embed(checkpoint_path, corpus_path, out_path);
    } else if (*trials) {
      experiment::stage_trials(embeddings_path, enroll_style, test_style,
                               out_path);
    } else if (*score) {
      experiment::stage_score(embeddings_path, trials_path,
                              experiment::backend_from_name(backend),
                              out_path);
    } else if (*eval) {
      metrics::DcfParams params;
      params.p_target = p_target;
      params.c_miss = c_miss;
      params.c_fa = c_fa;
      const experiment::EvalRecord record =
          experiment::stage_eval(scores_path, params, system_name);
      const std::string json = experiment::eval_record_to_json(record);
      std::cout << json;
      if (!out_path.empty()) write_text(out_path, json);
    } else if (*compare) {
      const experiment::CompareRecord record = experiment::stage_compare(
          scores_path, scores_b_path, trials_path, name_a, name_b);
      const std::string json = experiment::compare_record_to_json(record);
      std::cout << json;
      if (!out_path.empty()) write_text(out_path, json);
    } else if (*report) {
      std::vector<experiment::EvalRecord> records;
      for (const std::string& path : record_paths) {
        records.push_back(
            experiment::eval_record_from_json(read_text(path)));
      }
      std::vector<experiment::CompareRecord> compares;
      for (const std::string& path : compare_paths) {
        compares.push_back(
            experiment::compare_record_from_json(read_text(path)));
      }
      const experiment::ReportTable table =
          experiment::render_report(records, compares, baseline);
      std::cout << table.text;
      if (!out_table.empty()) write_text(out_table, table.text);
      if (!out_csv.empty()) write_text(out_csv, table.csv);
    } else if (*run) {
      return run_experiment(run_args);
    }
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
