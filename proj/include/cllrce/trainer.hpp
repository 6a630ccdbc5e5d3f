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
#include <random>
#include <vector>

#include "cllrce/common.hpp"
#include "cllrce/model.hpp"
#include "cllrce/synthdata.hpp"

namespace cllrce::trainer {

enum class LossKind { kCe, kCllr, kCllrCe };

struct TrainConfig {
  LossKind loss_kind = LossKind::kCllrCe;
  int batch_size = 128;
  int epochs = 100;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 1;
};

void validate_config(const TrainConfig& config);

struct TrainHistory {
  std::vector<double> mean_loss;  // per epoch, weighted by batch size
  std::vector<double> accuracy;   // per epoch training classification rate
  double wall_time_seconds = 0.0;
};

struct AdamState {
  std::int64_t step = 0;
  Vector first_moment;
  Vector second_moment;
};

AdamState make_adam_state(long n_params);

/// One bias-corrected Adam update over a flat parameter vector. Non-finite
/// gradients abort with a diagnostic error.
void adam_step(Vector& params, const Vector& grads, AdamState& state,
               const TrainConfig& config);

struct TrainResult {
  model::ModelParams params;
  TrainHistory history;
  std::int64_t steps = 0;
};

/// Builds shuffled minibatches of the train-split utterance indices. Every
/// batch is guaranteed to contain at least two distinct speakers whenever
/// the train split has two, by deterministic swap (or merge) fixups after
/// the shuffle. Exposed for tests.
std::vector<std::vector<std::size_t>> make_batches(
    const std::vector<synthdata::Utterance>& corpus,
    const std::vector<std::size_t>& train_indices, int batch_size,
    std::mt19937_64& rng);

/// Deterministic seeded training: per epoch, shuffled speaker-aware
/// minibatches; per step, forward -> classify -> selected loss -> backward
/// -> adam_step. Identical inputs give bit-identical parameters.
TrainResult train(const std::vector<synthdata::Utterance>& corpus,
                  const model::ModelConfig& model_config,
                  const TrainConfig& config);

}  // namespace cllrce::trainer
