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

#include "cllrce/trainer.hpp"

#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "cllrce/losses.hpp"

namespace cllrce::trainer {

namespace {

bool has_two_speakers(const std::vector<synthdata::Utterance>& corpus,
                      const std::vector<std::size_t>& batch) {
  for (std::size_t i = 1; i < batch.size(); ++i) {
    if (corpus[batch[i]].speaker_id != corpus[batch[0]].speaker_id) {
      return true;
    }
  }
  return false;
}

losses::LossOutput compute_loss(LossKind kind,
                                const losses::LogitBatch& logits,
                                const losses::LabelBatch& labels) {
  switch (kind) {
    case LossKind::kCe:
      return losses::ce_loss(logits, labels);
    case LossKind::kCllr:
      return losses::cllr_loss(logits, labels);
    case LossKind::kCllrCe:
      return losses::cllr_ce_loss(logits, labels);
  }
  throw ContractError("unknown loss kind");
}

}  // namespace

void validate_config(const TrainConfig& config) {
  require(config.batch_size >= 2, "batch_size must be >= 2");
  require(config.epochs >= 1, "epochs must be >= 1");
  require(config.learning_rate > 0.0, "learning_rate must be positive");
  require(config.adam_beta1 >= 0.0 && config.adam_beta1 < 1.0 &&
              config.adam_beta2 >= 0.0 && config.adam_beta2 < 1.0,
          "adam betas must lie in [0,1)");
  require(config.adam_eps > 0.0, "adam_eps must be positive");
}

AdamState make_adam_state(long n_params) {
  AdamState state;
  state.first_moment = Vector::Zero(n_params);
  state.second_moment = Vector::Zero(n_params);
  return state;
}

void adam_step(Vector& params, const Vector& grads, AdamState& state,
               const TrainConfig& config) {
  require(params.size() == grads.size(),
          "parameter and gradient sizes differ");
  require(state.first_moment.size() == params.size() &&
              state.second_moment.size() == params.size(),
          "adam state size does not match parameters");
  if (!grads.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite gradient at adam step " << (state.step + 1);
    throw std::runtime_error(msg.str());
  }

  state.step += 1;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  state.first_moment = b1 * state.first_moment + (1.0 - b1) * grads;
  state.second_moment =
      b2 * state.second_moment +
      (1.0 - b2) * grads.cwiseProduct(grads);
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(b1, t);
  const double bias2 = 1.0 - std::pow(b2, t);
  const Vector m_hat = state.first_moment / bias1;
  const Vector v_hat = state.second_moment / bias2;
  params -= config.learning_rate *
            m_hat.cwiseQuotient(
                (v_hat.array().sqrt() + config.adam_eps).matrix());
}

std::vector<std::vector<std::size_t>> make_batches(
    const std::vector<synthdata::Utterance>& corpus,
    const std::vector<std::size_t>& train_indices, int batch_size,
    std::mt19937_64& rng) {
  std::vector<std::size_t> order = train_indices;
  for (long i = static_cast<long>(order.size()) - 1; i > 0; --i) {
    std::uniform_int_distribution<long> pick(0, i);
    std::swap(order[static_cast<size_t>(i)],
              order[static_cast<size_t>(pick(rng))]);
  }

  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end =
        std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    batches.emplace_back(order.begin() + static_cast<long>(start),
                         order.begin() + static_cast<long>(end));
  }
  if (batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back()[0]);
    batches.pop_back();
  }

  std::set<int> distinct;
  for (std::size_t i : train_indices) distinct.insert(corpus[i].speaker_id);
  if (distinct.size() < 2) return batches;

  // Deterministic fixup: an all-same-speaker batch steals one utterance of a
  // different speaker from a batch that can spare it, or is merged into the
  // first batch holding another speaker.
  for (std::size_t b = 0; b < batches.size(); ++b) {
    if (batches[b].empty() || has_two_speakers(corpus, batches[b])) continue;
    const int lone_speaker = corpus[batches[b][0]].speaker_id;
    bool fixed = false;
    for (std::size_t d = 0; d < batches.size() && !fixed; ++d) {
      if (d == b) continue;
      int other_count = 0;
      for (std::size_t i : batches[d]) {
        if (corpus[i].speaker_id != lone_speaker) ++other_count;
      }
      if (other_count < 2) continue;
      for (std::size_t j = 0; j < batches[d].size(); ++j) {
        if (corpus[batches[d][j]].speaker_id != lone_speaker) {
          std::swap(batches[b][0], batches[d][j]);
          fixed = true;
          break;
        }
      }
    }
    if (!fixed) {
      for (std::size_t d = 0; d < batches.size(); ++d) {
        if (d == b || batches[d].empty()) continue;
        bool has_other = false;
        for (std::size_t i : batches[d]) {
          if (corpus[i].speaker_id != lone_speaker) has_other = true;
        }
        if (has_other) {
          batches[d].insert(batches[d].end(), batches[b].begin(),
                            batches[b].end());
          batches[b].clear();
          break;
        }
      }
    }
  }
  std::erase_if(batches, [](const auto& batch) { return batch.empty(); });
  return batches;
}

TrainResult train(const std::vector<synthdata::Utterance>& corpus,
                  const model::ModelConfig& model_config,
                  const TrainConfig& config) {
  validate_config(config);
  model::check_config(model_config);

  std::vector<std::size_t> train_indices;
  std::set<int> speakers;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].split == synthdata::Split::kTrain) {
      require(corpus[i].speaker_id >= 0 &&
                  corpus[i].speaker_id < model_config.n_speakers,
              "train speaker id outside the configured label space");
      train_indices.push_back(i);
      speakers.insert(corpus[i].speaker_id);
    }
  }
  require(!train_indices.empty(), "corpus has no train-split utterances");
  if (config.loss_kind != LossKind::kCe) {
    require(speakers.size() >= 2,
            "Cllr-based losses need at least two train speakers");
  }

  const auto start_time = std::chrono::steady_clock::now();
  model::ModelParams params = model::init_params(model_config, config.seed);
  Vector flat = model::pack(model_config, params);
  AdamState state = make_adam_state(flat.size());
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainResult result;
  result.history.mean_loss.reserve(static_cast<size_t>(config.epochs));
  result.history.accuracy.reserve(static_cast<size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches =
        make_batches(corpus, train_indices, config.batch_size, shuffle_rng);
    double loss_sum = 0.0;
    long correct = 0;
    long seen = 0;
    for (const auto& batch : batches) {
      const long m = static_cast<long>(batch.size());
      std::vector<model::ForwardCache> caches;
      caches.reserve(batch.size());
      losses::LogitBatch logits;
      logits.values = Matrix(m, model_config.n_speakers);
      losses::LabelBatch labels;
      labels.labels.reserve(batch.size());
      for (long row = 0; row < m; ++row) {
        const auto& utt = corpus[batch[static_cast<size_t>(row)]];
        caches.push_back(model::forward(model_config, params, utt.features));
        logits.values.row(row) = caches.back().logits.transpose();
        labels.labels.push_back(utt.speaker_id);
      }

      const losses::LossOutput loss =
          compute_loss(config.loss_kind, logits, labels);
      loss_sum += loss.value * static_cast<double>(m);
      for (long row = 0; row < m; ++row) {
        long argmax = 0;
        logits.values.row(row).maxCoeff(&argmax);
        if (static_cast<int>(argmax) == labels.labels[static_cast<size_t>(row)])
          ++correct;
      }
      seen += m;

      model::ModelGrads grads = model::zero_grads(model_config);
      for (long row = 0; row < m; ++row) {
        model::backward(model_config, params, caches[static_cast<size_t>(row)],
                        loss.grad.row(row).transpose(), grads);
      }
      const Vector flat_grads = model::pack(model_config, grads);
      adam_step(flat, flat_grads, state, config);
      model::unpack(model_config, flat, params);
    }
    result.history.mean_loss.push_back(loss_sum / static_cast<double>(seen));
    result.history.accuracy.push_back(static_cast<double>(correct) /
                                      static_cast<double>(seen));
  }

  result.params = std::move(params);
  result.steps = state.step;
  result.history.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    start_time)
          .count();
  return result;
}

}  // namespace cllrce::trainer
