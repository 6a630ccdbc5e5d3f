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
#include <optional>
#include <vector>

#include "cllrce/common.hpp"

namespace cllrce::model {

/// Variance floor inside every standard-deviation pooling square root.
inline constexpr double kStdEpsilon = 1e-8;

struct AttentionConfig {
  int attention_dim = 32;
  int condition_dim = 4;
};

enum class Pooling { kStats, kAttention };

/// Architecture of the embedding extractor: per-frame affine+tanh layers,
/// a pooling layer (statistics or condition-gated self-attention), an
/// affine embedding layer, and an affine classification layer.
struct ModelConfig {
  int feature_dim = 24;
  std::vector<int> frame_layer_dims = {64, 64};
  int embedding_dim = 32;
  int n_speakers = 0;
  Pooling pooling = Pooling::kStats;
  std::optional<AttentionConfig> attention;  // present iff attention pooling

  int hidden_dim() const {
    return frame_layer_dims.empty() ? feature_dim : frame_layer_dims.back();
  }
  int pooled_dim() const { return 2 * hidden_dim(); }
};

struct AffineLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

struct AttentionParams {
  Matrix gate_weight;       // cond x cond
  Vector gate_bias;         // cond
  Matrix transform_weight;  // cond x cond
  Vector transform_bias;    // cond
  Matrix energy_weight;     // attn x (hidden + cond)
  Vector energy_bias;       // attn
  Vector energy_vector;     // attn
};

/// All trainable tensors. Also reused as the gradient accumulator, which
/// mirrors the parameter layout exactly.
struct ModelParams {
  std::vector<AffineLayer> frame_layers;
  AffineLayer embed_layer;   // pooled -> embedding, affine only
  Matrix classifier_weight;  // embedding_dim x n_speakers (columns=speakers)
  Vector classifier_bias;    // n_speakers
  std::optional<AttentionParams> attention;
};

using ModelGrads = ModelParams;

/// Per-utterance forward activations kept for the backward pass.
struct ForwardCache {
  Matrix features;
  std::vector<Matrix> activations;  // per frame layer, frames x dim
  Vector condition;                 // attention mode
  Vector gate_sigmoid;
  Vector gate_linear;
  Vector condition_gated;
  Matrix energy_tanh;  // frames x attn
  Vector attn_weights;  // frames
  Vector mean;          // hidden
  Vector stddev;        // hidden
  Vector pooled;        // 2*hidden
  Vector embedding;
  Vector logits;
};

void check_config(const ModelConfig& config);

/// Seeded init: weights uniform in +-1/sqrt(fan_in), biases zero.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

ModelGrads zero_grads(const ModelConfig& config);

long param_count(const ModelConfig& config);

/// Flattens every tensor into one vector in a fixed order (and back).
Vector pack(const ModelConfig& config, const ModelParams& params);
void unpack(const ModelConfig& config, const Vector& flat,
            ModelParams& params);

/// Per-frame affine + tanh stack; frames are processed independently.
Matrix forward_frames(const ModelConfig& config, const ModelParams& params,
                      const Matrix& features);

/// Concatenated per-dimension mean and population standard deviation over
/// frames (variance floored by kStdEpsilon). Needs at least two frames.
Vector stats_pool(const Matrix& frame_acts);

/// Utterance-level variability descriptor: per-frame Shannon entropy of the
/// softmax over feature dimensions, summarized as (mean, std, min, max) and
/// projected to condition_dim by cyclic selection. A fixed function of the
/// features; carries no trainable parameters.
Vector condition_vector(const Matrix& features, int condition_dim);

/// Self-attention pooling with the condition vector injected by gating:
///   c' = logistic(Wg c + bg) .* (Wc c + bc)
///   e_f = v . tanh(Wh [h_f ; c'] + bh),  a = softmax(e)
/// output = [sum_f a_f h_f ; attention-weighted std].
/// With v = 0 the weights are uniform and the mean part equals stats_pool.
Vector attention_pool(const Matrix& frame_acts, const Vector& condition,
                      const AttentionParams& params);

/// Features -> embedding (the layer before classification).
Vector embed(const ModelConfig& config, const ModelParams& params,
             const Matrix& features);

/// W^T embedding + b: one logit per training speaker.
Vector classify(const ModelParams& params, const Vector& embedding);

/// Full forward pass with cached intermediates for backward().
ForwardCache forward(const ModelConfig& config, const ModelParams& params,
                     const Matrix& features);

/// Accumulates exact analytic parameter gradients for one utterance given
/// d(loss)/d(logits). The cache must come from forward() on the same
/// params.
void backward(const ModelConfig& config, const ModelParams& params,
              const ForwardCache& cache, const Vector& dlogits,
              ModelGrads& grads);

}  // namespace cllrce::model
