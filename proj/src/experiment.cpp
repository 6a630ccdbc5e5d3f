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

#include "cllrce/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cllrce::experiment {

namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t kSplitSeedSalt = 0x73706c69742d3031ULL;

void check_keys(const ordered_json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
  require(obj.is_object(),
          "config section '" + section + "' must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) known = true;
    }
    if (!known) {
      throw ContractError("unknown config key: " + section + "." + it.key());
    }
  }
}

template <typename T>
T get_number(const ordered_json& obj, const std::string& section,
             const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& value = obj.at(key);
  require(value.is_number(),
          "config key " + section + "." + key + " must be a number");
  return value.get<T>();
}

int get_int(const ordered_json& obj, const std::string& section,
            const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& value = obj.at(key);
  require(value.is_number_integer(),
          "config key " + section + "." + key + " must be an integer");
  return value.get<int>();
}

bool get_bool(const ordered_json& obj, const std::string& section,
              const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& value = obj.at(key);
  require(value.is_boolean(),
          "config key " + section + "." + key + " must be a boolean");
  return value.get<bool>();
}

std::string get_string(const ordered_json& obj, const std::string& section,
                       const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& value = obj.at(key);
  require(value.is_string(),
          "config key " + section + "." + key + " must be a string");
  return value.get<std::string>();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

metrics::TrialScore to_trial_score(const io::ScoreRecord& record) {
  const io::ParsedKey enroll = io::parse_key(record.enroll_key);
  const io::ParsedKey test = io::parse_key(record.test_key);
  return {record.score, enroll.speaker_id == test.speaker_id};
}

// Styles are reported only when homogeneous across the records.
void infer_styles(const std::vector<io::ScoreRecord>& records,
                  int& enroll_style, int& test_style) {
  std::set<int> enroll_styles;
  std::set<int> test_styles;
  for (const auto& record : records) {
    enroll_styles.insert(io::parse_key(record.enroll_key).style_id);
    test_styles.insert(io::parse_key(record.test_key).style_id);
  }
  enroll_style = enroll_styles.size() == 1 ? *enroll_styles.begin() : -1;
  test_style = test_styles.size() == 1 ? *test_styles.begin() : -1;
}

const char* mcnemar_method_name(metrics::McNemarMethod method) {
  return method == metrics::McNemarMethod::kExactBinomial
             ? "exact-binomial"
             : "chi-square-corrected";
}

}  // namespace

const char* loss_name(trainer::LossKind kind) {
  switch (kind) {
    case trainer::LossKind::kCe:
      return "ce";
    case trainer::LossKind::kCllr:
      return "cllr";
    case trainer::LossKind::kCllrCe:
      return "cllr_ce";
  }
  throw ContractError("unknown loss kind");
}

trainer::LossKind loss_from_name(const std::string& name) {
  if (name == "ce") return trainer::LossKind::kCe;
  if (name == "cllr") return trainer::LossKind::kCllr;
  if (name == "cllr_ce") return trainer::LossKind::kCllrCe;
  throw ContractError("unknown loss name: " + name +
                      " (expected ce|cllr|cllr_ce)");
}

const char* pooling_name(model::Pooling pooling) {
  return pooling == model::Pooling::kStats ? "stats" : "attn";
}

const char* backend_name(scoring::BackendKind kind) {
  return kind == scoring::BackendKind::kCosine ? "cosine" : "twocov";
}

scoring::BackendKind backend_from_name(const std::string& name) {
  if (name == "cosine") return scoring::BackendKind::kCosine;
  if (name == "twocov") return scoring::BackendKind::kTwoCov;
  throw ContractError("unknown backend name: " + name +
                      " (expected cosine|twocov)");
}

ExperimentConfig parse_config_text(const std::string& json_text) {
  ordered_json root;
  try {
    root = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& error) {
    throw ContractError(std::string("config is not valid JSON: ") +
                        error.what());
  }
  check_keys(root, "config",
             {"corpus", "model", "train", "scoring", "output_dir"});

  ExperimentConfig config;

  if (root.contains("corpus")) {
    const auto& corpus = root.at("corpus");
    check_keys(corpus, "corpus",
               {"n_speakers", "n_styles", "utts_per_speaker_style",
                "frames_min", "frames_max", "feature_dim", "latent_dim",
                "sigma_speaker", "sigma_style", "sigma_frame", "seed",
                "enroll_fraction", "allow_single_utterance_reuse"});
    auto& spec = config.corpus.spec;
    spec.n_speakers = get_int(corpus, "corpus", "n_speakers", spec.n_speakers);
    spec.n_styles = get_int(corpus, "corpus", "n_styles", spec.n_styles);
    spec.utts_per_speaker_style = get_int(corpus, "corpus",
                                          "utts_per_speaker_style",
                                          spec.utts_per_speaker_style);
    spec.frames_min = get_int(corpus, "corpus", "frames_min", spec.frames_min);
    spec.frames_max = get_int(corpus, "corpus", "frames_max", spec.frames_max);
    spec.feature_dim =
        get_int(corpus, "corpus", "feature_dim", spec.feature_dim);
    spec.latent_dim = get_int(corpus, "corpus", "latent_dim", spec.latent_dim);
    spec.sigma_speaker = get_number<double>(corpus, "corpus", "sigma_speaker",
                                            spec.sigma_speaker);
    spec.sigma_style = get_number<double>(corpus, "corpus", "sigma_style",
                                          spec.sigma_style);
    spec.sigma_frame = get_number<double>(corpus, "corpus", "sigma_frame",
                                          spec.sigma_frame);
    spec.seed = get_number<std::uint64_t>(corpus, "corpus", "seed", spec.seed);
    config.corpus.enroll_fraction =
        get_number<double>(corpus, "corpus", "enroll_fraction",
                           config.corpus.enroll_fraction);
    config.corpus.allow_single_utterance_reuse =
        get_bool(corpus, "corpus", "allow_single_utterance_reuse",
                 config.corpus.allow_single_utterance_reuse);
  }
  synthdata::validate_spec(config.corpus.spec);
  require(config.corpus.enroll_fraction > 0.0 &&
              config.corpus.enroll_fraction < 1.0,
          "corpus.enroll_fraction must lie in (0,1)");

  if (root.contains("model")) {
    const auto& model_obj = root.at("model");
    check_keys(model_obj, "model",
               {"frame_layer_dims", "embedding_dim", "pooling",
                "attention_dim", "condition_dim"});
    if (model_obj.contains("frame_layer_dims")) {
      const auto& dims = model_obj.at("frame_layer_dims");
      require(dims.is_array(),
              "config key model.frame_layer_dims must be an array");
      config.model.frame_layer_dims.clear();
      for (const auto& d : dims) {
        require(d.is_number_integer(),
                "model.frame_layer_dims entries must be integers");
        config.model.frame_layer_dims.push_back(d.get<int>());
      }
    }
    config.model.embedding_dim = get_int(model_obj, "model", "embedding_dim",
                                         config.model.embedding_dim);
    const std::string pooling =
        get_string(model_obj, "model", "pooling", "stats");
    if (pooling == "stats") {
      config.model.pooling = model::Pooling::kStats;
      require(!model_obj.contains("attention_dim") &&
                  !model_obj.contains("condition_dim"),
              "attention_dim/condition_dim only valid with attention "
              "pooling");
    } else if (pooling == "attn") {
      config.model.pooling = model::Pooling::kAttention;
      model::AttentionConfig attention;
      attention.attention_dim = get_int(model_obj, "model", "attention_dim",
                                        attention.attention_dim);
      attention.condition_dim = get_int(model_obj, "model", "condition_dim",
                                        attention.condition_dim);
      config.model.attention = attention;
    } else {
      throw ContractError("unknown pooling: " + pooling +
                          " (expected stats|attn)");
    }
  }
  config.model.feature_dim = config.corpus.spec.feature_dim;
  config.model.n_speakers = config.corpus.spec.n_speakers;
  model::check_config(config.model);

  if (root.contains("train")) {
    const auto& train = root.at("train");
    check_keys(train, "train",
               {"loss", "batch_size", "epochs", "learning_rate", "adam_beta1",
                "adam_beta2", "adam_eps", "seed"});
    config.train.loss_kind =
        loss_from_name(get_string(train, "train", "loss", "cllr_ce"));
    config.train.batch_size =
        get_int(train, "train", "batch_size", config.train.batch_size);
    config.train.epochs = get_int(train, "train", "epochs",
                                  config.train.epochs);
    config.train.learning_rate = get_number<double>(
        train, "train", "learning_rate", config.train.learning_rate);
    config.train.adam_beta1 = get_number<double>(train, "train", "adam_beta1",
                                                 config.train.adam_beta1);
    config.train.adam_beta2 = get_number<double>(train, "train", "adam_beta2",
                                                 config.train.adam_beta2);
    config.train.adam_eps = get_number<double>(train, "train", "adam_eps",
                                               config.train.adam_eps);
    config.train.seed =
        get_number<std::uint64_t>(train, "train", "seed", config.train.seed);
  }
  trainer::validate_config(config.train);

  if (root.contains("scoring")) {
    const auto& scoring_obj = root.at("scoring");
    check_keys(scoring_obj, "scoring", {"backend"});
    config.backend =
        backend_from_name(get_string(scoring_obj, "scoring", "backend",
                                     "cosine"));
  }

  config.output_dir =
      get_string(root, "config", "output_dir", config.output_dir);
  return config;
}

ExperimentConfig load_config_file(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

std::vector<synthdata::Utterance> make_corpus(const CorpusConfig& config) {
  std::vector<synthdata::Utterance> corpus =
      synthdata::generate_corpus(config.spec);
  synthdata::split_corpus(corpus, config.enroll_fraction,
                          config.spec.seed ^ kSplitSeedSalt,
                          config.allow_single_utterance_reuse);
  return corpus;
}

std::vector<scoring::EmbeddedUtterance> embed_corpus(
    const model::ModelConfig& config, const model::ModelParams& params,
    const std::vector<synthdata::Utterance>& corpus) {
  std::vector<scoring::EmbeddedUtterance> utts;
  utts.reserve(corpus.size());
  for (const auto& utt : corpus) {
    scoring::EmbeddedUtterance embedded;
    embedded.embedding = model::embed(config, params, utt.features);
    embedded.speaker_id = utt.speaker_id;
    embedded.style_id = utt.style_id;
    embedded.cell_index = utt.cell_index;
    embedded.split = utt.split;
    utts.push_back(std::move(embedded));
  }
  return utts;
}

std::string eval_record_to_json(const EvalRecord& record) {
  ordered_json j;
  j["system"] = record.system;
  j["enroll_style"] = record.enroll_style;
  j["test_style"] = record.test_style;
  j["eer"] = record.eer;
  j["min_dcf"] = record.min_dcf;
  j["cllr"] = record.cllr;
  j["eer_threshold"] = record.eer_threshold;
  j["n_target"] = record.n_target;
  j["n_nontarget"] = record.n_nontarget;
  return j.dump(2) + "\n";
}

EvalRecord eval_record_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  EvalRecord record;
  record.system = j.at("system").get<std::string>();
  record.enroll_style = j.at("enroll_style").get<int>();
  record.test_style = j.at("test_style").get<int>();
  record.eer = j.at("eer").get<double>();
  record.min_dcf = j.at("min_dcf").get<double>();
  record.cllr = j.at("cllr").get<double>();
  record.eer_threshold = j.at("eer_threshold").get<double>();
  record.n_target = j.at("n_target").get<std::int64_t>();
  record.n_nontarget = j.at("n_nontarget").get<std::int64_t>();
  return record;
}

std::string compare_record_to_json(const CompareRecord& record) {
  ordered_json j;
  j["system_a"] = record.system_a;
  j["system_b"] = record.system_b;
  j["enroll_style"] = record.enroll_style;
  j["test_style"] = record.test_style;
  j["n01"] = record.n01;
  j["n10"] = record.n10;
  j["statistic"] = record.statistic;
  j["p_value"] = record.p_value;
  j["method"] = record.method;
  j["significant"] = record.significant;
  return j.dump(2) + "\n";
}

CompareRecord compare_record_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  CompareRecord record;
  record.system_a = j.at("system_a").get<std::string>();
  record.system_b = j.at("system_b").get<std::string>();
  record.enroll_style = j.at("enroll_style").get<int>();
  record.test_style = j.at("test_style").get<int>();
  record.n01 = j.at("n01").get<std::int64_t>();
  record.n10 = j.at("n10").get<std::int64_t>();
  record.statistic = j.at("statistic").get<double>();
  record.p_value = j.at("p_value").get<double>();
  record.method = j.at("method").get<std::string>();
  record.significant = j.at("significant").get<bool>();
  return record;
}

std::string history_to_csv(const trainer::TrainHistory& history) {
  std::ostringstream out;
  out << "epoch,mean_loss,accuracy\n";
  for (std::size_t i = 0; i < history.mean_loss.size(); ++i) {
    out << (i + 1) << ',' << io::format_double(history.mean_loss[i]) << ','
        << io::format_double(history.accuracy[i]) << '\n';
  }
  return out.str();
}

std::vector<io::ScoreRecord> score_trial_records(
    const std::vector<io::TrialRecord>& trials,
    const std::vector<scoring::EmbeddedUtterance>& utts,
    scoring::BackendKind backend_kind) {
  std::map<std::string, std::size_t> by_key;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    by_key[io::utt_key(utts[i].speaker_id, utts[i].style_id,
                       utts[i].cell_index)] = i;
  }

  std::vector<scoring::Trial> resolved;
  resolved.reserve(trials.size());
  for (const auto& trial : trials) {
    const io::ParsedKey enroll = io::parse_key(trial.enroll_key);
    const auto found = by_key.find(trial.test_key);
    require(found != by_key.end(), "unresolved key: " + trial.test_key);
    resolved.push_back({enroll.speaker_id, enroll.style_id, found->second,
                        trial.is_target});
  }

  scoring::ScoringBackend backend;
  backend.kind = backend_kind;
  if (backend_kind == scoring::BackendKind::kTwoCov) {
    std::vector<Vector> train_embeddings;
    std::vector<int> train_labels;
    for (const auto& utt : utts) {
      if (utt.split != synthdata::Split::kTrain) continue;
      const double norm = utt.embedding.norm();
      require(norm > 0.0, "train embedding has zero norm");
      train_embeddings.push_back(utt.embedding / norm);
      train_labels.push_back(utt.speaker_id);
    }
    backend.two_cov = scoring::fit_two_cov(train_embeddings, train_labels);
  }

  const scoring::ScoringResult result =
      scoring::score_trials(resolved, utts, backend);
  std::vector<io::ScoreRecord> records;
  records.reserve(result.trials.size());
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    records.push_back(
        {trials[i].enroll_key, trials[i].test_key, result.trials[i].score});
  }
  return records;
}

EvalRecord evaluate_score_records(const std::vector<io::ScoreRecord>& records,
                                  const metrics::DcfParams& params,
                                  const std::string& system) {
  require(!records.empty(), "score file is empty");
  std::vector<metrics::TrialScore> trials;
  trials.reserve(records.size());
  for (const auto& record : records) {
    trials.push_back(to_trial_score(record));
  }
  const metrics::MetricsReport report = metrics::evaluate(trials, params);

  EvalRecord record;
  record.system = system;
  infer_styles(records, record.enroll_style, record.test_style);
  record.eer = report.eer;
  record.min_dcf = report.min_dcf;
  record.cllr = report.cllr;
  record.eer_threshold = report.eer_threshold;
  record.n_target = report.n_target;
  record.n_nontarget = report.n_nontarget;
  return record;
}

CompareRecord compare_score_records(
    const std::vector<io::TrialRecord>& trials,
    const std::vector<io::ScoreRecord>& scores_a,
    const std::vector<io::ScoreRecord>& scores_b, const std::string& name_a,
    const std::string& name_b) {
  require(!trials.empty(), "trial list is empty");
  const auto index_scores =
      [](const std::vector<io::ScoreRecord>& records) {
        std::map<std::pair<std::string, std::string>, double> index;
        for (const auto& record : records) {
          index[{record.enroll_key, record.test_key}] = record.score;
        }
        return index;
      };
  const auto index_a = index_scores(scores_a);
  const auto index_b = index_scores(scores_b);

  std::vector<metrics::TrialScore> trials_a;
  std::vector<metrics::TrialScore> trials_b;
  ScoreSet set_a;
  ScoreSet set_b;
  trials_a.reserve(trials.size());
  trials_b.reserve(trials.size());
  for (const auto& trial : trials) {
    const auto key = std::make_pair(trial.enroll_key, trial.test_key);
    const auto in_a = index_a.find(key);
    const auto in_b = index_b.find(key);
    require(in_a != index_a.end(), "score file A missing trial: " +
                                       trial.enroll_key + " " +
                                       trial.test_key);
    require(in_b != index_b.end(), "score file B missing trial: " +
                                       trial.enroll_key + " " +
                                       trial.test_key);
    trials_a.push_back({in_a->second, trial.is_target});
    trials_b.push_back({in_b->second, trial.is_target});
    (trial.is_target ? set_a.target_scores : set_a.nontarget_scores)
        .push_back(in_a->second);
    (trial.is_target ? set_b.target_scores : set_b.nontarget_scores)
        .push_back(in_b->second);
  }

  // Decisions at each system's own EER threshold.
  const double threshold_a = metrics::eer_with_threshold(set_a).threshold;
  const double threshold_b = metrics::eer_with_threshold(set_b).threshold;
  const std::vector<bool> correct_a =
      metrics::decisions_at(trials_a, threshold_a);
  const std::vector<bool> correct_b =
      metrics::decisions_at(trials_b, threshold_b);
  const metrics::McNemarResult result = metrics::mcnemar(correct_a, correct_b);

  CompareRecord record;
  record.system_a = name_a;
  record.system_b = name_b;
  std::set<int> enroll_styles;
  std::set<int> test_styles;
  for (const auto& trial : trials) {
    enroll_styles.insert(io::parse_key(trial.enroll_key).style_id);
    test_styles.insert(io::parse_key(trial.test_key).style_id);
  }
  record.enroll_style =
      enroll_styles.size() == 1 ? *enroll_styles.begin() : -1;
  record.test_style = test_styles.size() == 1 ? *test_styles.begin() : -1;
  record.n01 = result.n01;
  record.n10 = result.n10;
  record.statistic = result.statistic;
  record.p_value = result.p_value;
  record.method = mcnemar_method_name(result.method);
  record.significant = result.p_value < 0.05;
  return record;
}

ReportTable render_report(const std::vector<EvalRecord>& records,
                          const std::vector<CompareRecord>& compares,
                          const std::string& baseline) {
  require(!records.empty(), "no evaluation records to report");

  std::vector<std::string> systems;
  for (const auto& record : records) {
    if (std::find(systems.begin(), systems.end(), record.system) ==
        systems.end()) {
      systems.push_back(record.system);
    }
  }
  std::string base = baseline.empty() ? systems.front() : baseline;
  require(std::find(systems.begin(), systems.end(), base) != systems.end(),
          "baseline system not present in the records: " + base);

  std::set<std::pair<int, int>> conditions;
  std::map<std::pair<std::pair<int, int>, std::string>, const EvalRecord*>
      cells;
  for (const auto& record : records) {
    const auto condition = std::make_pair(record.enroll_style,
                                          record.test_style);
    conditions.insert(condition);
    cells[{condition, record.system}] = &record;
  }

  std::map<std::pair<std::pair<int, int>, std::string>, const CompareRecord*>
      significance;
  for (const auto& compare : compares) {
    const auto condition =
        std::make_pair(compare.enroll_style, compare.test_style);
    if (compare.system_a == base) {
      significance[{condition, compare.system_b}] = &compare;
    } else if (compare.system_b == base) {
      significance[{condition, compare.system_a}] = &compare;
    }
  }

  std::ostringstream text;
  text << std::left << std::setw(8) << "enroll" << std::setw(8) << "test"
       << std::setw(8) << "n_tar" << std::setw(8) << "n_non";
  for (const auto& system : systems) {
    text << "| " << std::setw(34) << (system + (system == base ?
                                                " (baseline)" : ""));
  }
  text << '\n';
  text << std::setw(32) << "";
  for (std::size_t i = 0; i < systems.size(); ++i) {
    text << "| " << std::left << std::setw(8) << "EER%" << std::setw(9)
         << "minDCF" << std::setw(9) << "Cllr" << std::setw(8) << "sig";
  }
  text << '\n';

  std::ostringstream csv;
  csv << "system,enroll_style,test_style,eer_percent,min_dcf,cllr,n_target,"
         "n_nontarget,p_value_vs_baseline,significant\n";

  for (const auto& condition : conditions) {
    const EvalRecord* any_cell = nullptr;
    for (const auto& system : systems) {
      const auto found = cells.find({condition, system});
      if (found != cells.end()) any_cell = found->second;
    }
    text << std::left << std::setw(8) << condition.first << std::setw(8)
         << condition.second << std::setw(8)
         << (any_cell != nullptr ? std::to_string(any_cell->n_target) : "-")
         << std::setw(8)
         << (any_cell != nullptr ? std::to_string(any_cell->n_nontarget)
                                 : "-");
    for (const auto& system : systems) {
      const auto found = cells.find({condition, system});
      if (found == cells.end()) {
        text << "| " << std::setw(34) << "-";
        continue;
      }
      const EvalRecord& cell = *found->second;
      std::string marker = "-";
      std::string p_value_text;
      if (system != base) {
        const auto sig = significance.find({condition, system});
        if (sig != significance.end()) {
          marker = sig->second->significant ? "*" : "n.s.";
          p_value_text = io::format_double(sig->second->p_value);
        }
      }
      std::ostringstream group;
      group << std::fixed << std::setprecision(2) << std::setw(6)
            << 100.0 * cell.eer << "  " << std::setprecision(3)
            << std::setw(7) << cell.min_dcf << "  " << std::setw(7)
            << cell.cllr << "  " << marker;
      text << "| " << std::left << std::setw(34) << group.str();

      csv << system << ',' << condition.first << ',' << condition.second
          << ',' << io::format_double(100.0 * cell.eer) << ','
          << io::format_double(cell.min_dcf) << ','
          << io::format_double(cell.cllr) << ',' << cell.n_target << ','
          << cell.n_nontarget << ',' << p_value_text << ','
          << (system == base ? "" : (marker == "*" ? "1" : "0")) << '\n';
    }
    text << '\n';
  }

  ReportTable table;
  table.text = text.str();
  table.csv = csv.str();
  return table;
}

void stage_synth(const ExperimentConfig& config, const std::string& out_path) {
  io::write_feature_archive(out_path, make_corpus(config.corpus));
}

void stage_train(const ExperimentConfig& config,
                 const std::string& corpus_path, trainer::LossKind loss,
                 const std::string& checkpoint_path,
                 const std::string& history_path) {
  const std::vector<synthdata::Utterance> corpus =
      io::read_feature_archive(corpus_path);
  trainer::TrainConfig train_config = config.train;
  train_config.loss_kind = loss;
  const trainer::TrainResult result =
      trainer::train(corpus, config.model, train_config);

  io::Checkpoint checkpoint;
  checkpoint.config = config.model;
  checkpoint.params = result.params;
  checkpoint.steps = result.steps;
  io::write_checkpoint(checkpoint_path, checkpoint);
  if (!history_path.empty()) {
    write_text_file(history_path, history_to_csv(result.history));
  }
}

void stage_embed(const std::string& checkpoint_path,
                 const std::string& corpus_path, const std::string& out_path) {
  const io::Checkpoint checkpoint = io::read_checkpoint(checkpoint_path);
  const std::vector<synthdata::Utterance> corpus =
      io::read_feature_archive(corpus_path);
  io::write_embedding_archive(
      out_path, embed_corpus(checkpoint.config, checkpoint.params, corpus));
}

void stage_trials(const std::string& embeddings_path, int enroll_style,
                  int test_style, const std::string& out_path) {
  const std::vector<scoring::EmbeddedUtterance> utts =
      io::read_embedding_archive(embeddings_path);
  const std::vector<scoring::Trial> trials =
      scoring::build_trials(utts, enroll_style, test_style);
  std::vector<io::TrialRecord> records;
  records.reserve(trials.size());
  for (const auto& trial : trials) {
    const auto& test_utt = utts[trial.test_index];
    records.push_back({io::enroll_key(trial.enroll_speaker,
                                      trial.enroll_style),
                       io::utt_key(test_utt.speaker_id, test_utt.style_id,
                                   test_utt.cell_index),
                       trial.is_target});
  }
  io::write_trial_list(out_path, records);
}

void stage_score(const std::string& embeddings_path,
                 const std::string& trials_path,
                 scoring::BackendKind backend, const std::string& out_path) {
  const std::vector<scoring::EmbeddedUtterance> utts =
      io::read_embedding_archive(embeddings_path);
  const std::vector<io::TrialRecord> trials =
      io::read_trial_list(trials_path);
  io::write_score_file(out_path, score_trial_records(trials, utts, backend));
}

EvalRecord stage_eval(const std::string& score_path,
                      const metrics::DcfParams& params,
                      const std::string& system) {
  return evaluate_score_records(io::read_score_file(score_path), params,
                                system);
}

CompareRecord stage_compare(const std::string& scores_a_path,
                            const std::string& scores_b_path,
                            const std::string& trials_path,
                            const std::string& name_a,
                            const std::string& name_b) {
  return compare_score_records(io::read_trial_list(trials_path),
                               io::read_score_file(scores_a_path),
                               io::read_score_file(scores_b_path), name_a,
                               name_b);
}

}  // namespace cllrce::experiment
