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

#include "cllrce/model.hpp"

#include <cmath>
#include <random>

#include "cllrce/losses.hpp"

namespace cllrce::model {

namespace {

// Visits every parameter tensor in the canonical order shared by init,
// pack/unpack, and the Adam state layout.
template <typename Params, typename Fn>
void visit_tensors(Params& params, Fn&& fn) {
  for (auto& layer : params.frame_layers) {
    fn(layer.weight);
    fn(layer.bias);
  }
  fn(params.embed_layer.weight);
  fn(params.embed_layer.bias);
  fn(params.classifier_weight);
  fn(params.classifier_bias);
  if (params.attention.has_value()) {
    auto& attn = *params.attention;
    fn(attn.gate_weight);
    fn(attn.gate_bias);
    fn(attn.transform_weight);
    fn(attn.transform_bias);
    fn(attn.energy_weight);
    fn(attn.energy_bias);
    fn(attn.energy_vector);
  }
}

// Allocates all tensors with the configured shapes, zero filled.
ModelParams shaped_zeros(const ModelConfig& config) {
  ModelParams params;
  int in_dim = config.feature_dim;
  for (int out_dim : config.frame_layer_dims) {
    params.frame_layers.push_back(
        {Matrix::Zero(out_dim, in_dim), Vector::Zero(out_dim)});
    in_dim = out_dim;
  }
  params.embed_layer = {Matrix::Zero(config.embedding_dim, config.pooled_dim()),
                        Vector::Zero(config.embedding_dim)};
  params.classifier_weight =
      Matrix::Zero(config.embedding_dim, config.n_speakers);
  params.classifier_bias = Vector::Zero(config.n_speakers);
  if (config.pooling == Pooling::kAttention) {
    const int cond = config.attention->condition_dim;
    const int attn = config.attention->attention_dim;
    AttentionParams a;
    a.gate_weight = Matrix::Zero(cond, cond);
    a.gate_bias = Vector::Zero(cond);
    a.transform_weight = Matrix::Zero(cond, cond);
    a.transform_bias = Vector::Zero(cond);
    a.energy_weight = Matrix::Zero(attn, config.hidden_dim() + cond);
    a.energy_bias = Vector::Zero(attn);
    a.energy_vector = Vector::Zero(attn);
    params.attention = std::move(a);
  }
  return params;
}

Matrix affine_tanh(const Matrix& input, const AffineLayer& layer) {
  Matrix pre = input * layer.weight.transpose();
  pre.rowwise() += layer.bias.transpose();
  return pre.array().tanh().matrix();
}

// Weighted mean / weighted population std pooling shared by both modes;
// weights must sum to one.
void pool_with_weights(const Matrix& acts, const Vector& weights,
                       Vector& mean, Vector& stddev) {
  mean = acts.transpose() * weights;
  const Matrix centered = acts.rowwise() - mean.transpose();
  const Vector var =
      centered.cwiseProduct(centered).transpose() * weights;
  stddev = (var.array() + kStdEpsilon).sqrt().matrix();
}

Vector softmax_vector(const Vector& values) {
  const double shift = values.maxCoeff();
  Vector out = (values.array() - shift).exp().matrix();
  out /= out.sum();
  return out;
}

}  // namespace

void check_config(const ModelConfig& config) {
  require(config.feature_dim >= 1, "feature_dim must be >= 1");
  require(config.embedding_dim >= 1, "embedding_dim must be >= 1");
  require(config.n_speakers >= 1, "n_speakers must be >= 1");
  for (int d : config.frame_layer_dims) {
    require(d >= 1, "frame layer widths must be >= 1");
  }
  if (config.pooling == Pooling::kAttention) {
    require(config.attention.has_value(),
            "attention pooling needs attention config");
    require(config.attention->attention_dim >= 1 &&
                config.attention->condition_dim >= 1,
            "attention dims must be >= 1");
  } else {
    require(!config.attention.has_value(),
            "attention config only valid with attention pooling");
  }
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  check_config(config);
  ModelParams params = shaped_zeros(config);
  std::mt19937_64 rng(seed);
  const auto fill = [&rng](Matrix& weight, long fan_in) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    for (long r = 0; r < weight.rows(); ++r) {
      for (long c = 0; c < weight.cols(); ++c) {
        weight(r, c) = uniform(rng);
      }
    }
  };
  for (auto& layer : params.frame_layers) {
    fill(layer.weight, layer.weight.cols());
  }
  fill(params.embed_layer.weight, params.embed_layer.weight.cols());
  // Classifier columns consume the embedding, so fan-in is embedding_dim.
  fill(params.classifier_weight, params.classifier_weight.rows());
  if (params.attention.has_value()) {
    auto& attn = *params.attention;
    fill(attn.gate_weight, attn.gate_weight.cols());
    fill(attn.transform_weight, attn.transform_weight.cols());
    fill(attn.energy_weight, attn.energy_weight.cols());
    Matrix v = attn.energy_vector;
    fill(v, v.rows());
    attn.energy_vector = v;
  }
  return params;
}

ModelGrads zero_grads(const ModelConfig& config) {
  check_config(config);
  return shaped_zeros(config);
}

long param_count(const ModelConfig& config) {
  ModelParams params = shaped_zeros(config);
  long count = 0;
  visit_tensors(params, [&count](const auto& tensor) {
    count += static_cast<long>(tensor.size());
  });
  return count;
}

Vector pack(const ModelConfig& config, const ModelParams& params) {
  Vector flat(param_count(config));
  long offset = 0;
  visit_tensors(const_cast<ModelParams&>(params),
                [&flat, &offset](const auto& tensor) {
                  const long n = static_cast<long>(tensor.size());
                  flat.segment(offset, n) =
                      Eigen::Map<const Vector>(tensor.data(), n);
                  offset += n;
                });
  return flat;
}

void unpack(const ModelConfig& config, const Vector& flat,
            ModelParams& params) {
  require(flat.size() == param_count(config),
          "flat parameter vector has wrong length");
  long offset = 0;
  visit_tensors(params, [&flat, &offset](auto& tensor) {
    const long n = static_cast<long>(tensor.size());
    Eigen::Map<Vector>(tensor.data(), n) = flat.segment(offset, n);
    offset += n;
  });
}

Matrix forward_frames(const ModelConfig& config, const ModelParams& params,
                      const Matrix& features) {
  require(features.cols() == config.feature_dim,
          "feature dimension does not match config");
  require(features.rows() >= 1, "utterance has no frames");
  Matrix acts = features;
  for (const auto& layer : params.frame_layers) {
    acts = affine_tanh(acts, layer);
  }
  return acts;
}

Vector stats_pool(const Matrix& frame_acts) {
  require(frame_acts.rows() >= 2, "stats pooling needs at least two frames");
  const long frames = frame_acts.rows();
  const Vector weights =
      Vector::Constant(frames, 1.0 / static_cast<double>(frames));
  Vector mean;
  Vector stddev;
  pool_with_weights(frame_acts, weights, mean, stddev);
  Vector pooled(2 * frame_acts.cols());
  pooled << mean, stddev;
  return pooled;
}

Vector condition_vector(const Matrix& features, int condition_dim) {
  require(features.rows() >= 1, "condition vector needs at least one frame");
  require(condition_dim >= 1, "condition_dim must be >= 1");
  const long frames = features.rows();
  Vector entropy(frames);
  for (long f = 0; f < frames; ++f) {
    const Vector x = features.row(f).transpose();
    const double shift = x.maxCoeff();
    const Eigen::ArrayXd p = (x.array() - shift).exp();
    const double z = p.sum();
    const double log_sum_exp = shift + std::log(z);
    // H = logsumexp(x) - sum_j softmax(x)_j * x_j; avoids log over
    // underflowed probabilities.
    entropy(f) = log_sum_exp - (p * x.array()).sum() / z;
  }
  const double mean = entropy.mean();
  const double variance = (entropy.array() - mean).square().mean();
  Eigen::Vector4d summary;
  summary << mean, std::sqrt(variance), entropy.minCoeff(),
      entropy.maxCoeff();
  Vector condition(condition_dim);
  for (int i = 0; i < condition_dim; ++i) condition(i) = summary(i % 4);
  return condition;
}

Vector attention_pool(const Matrix& frame_acts, const Vector& condition,
                      const AttentionParams& params) {
  const long frames = frame_acts.rows();
  require(frames >= 1, "attention pooling needs at least one frame");
  require(condition.size() == params.gate_weight.cols(),
          "condition dimension does not match attention params");
  require(params.energy_weight.cols() == frame_acts.cols() + condition.size(),
          "energy weight shape does not match inputs");

  Vector gate = params.gate_weight * condition + params.gate_bias;
  for (long i = 0; i < gate.size(); ++i) gate(i) = losses::logistic(gate(i));
  const Vector linear =
      params.transform_weight * condition + params.transform_bias;
  const Vector gated = gate.cwiseProduct(linear);

  Vector energies(frames);
  for (long f = 0; f < frames; ++f) {
    Vector joint(frame_acts.cols() + gated.size());
    joint << frame_acts.row(f).transpose(), gated;
    const Vector t =
        (params.energy_weight * joint + params.energy_bias).array().tanh().matrix();
    energies(f) = params.energy_vector.dot(t);
  }
  const Vector weights = softmax_vector(energies);

  Vector mean;
  Vector stddev;
  pool_with_weights(frame_acts, weights, mean, stddev);
  Vector pooled(2 * frame_acts.cols());
  pooled << mean, stddev;
  return pooled;
}

Vector embed(const ModelConfig& config, const ModelParams& params,
             const Matrix& features) {
  return forward(config, params, features).embedding;
}

Vector classify(const ModelParams& params, const Vector& embedding) {
  require(embedding.size() == params.classifier_weight.rows(),
          "embedding dimension does not match classifier");
  return params.classifier_weight.transpose() * embedding +
         params.classifier_bias;
}

ForwardCache forward(const ModelConfig& config, const ModelParams& params,
                     const Matrix& features) {
  check_config(config);
  require(features.cols() == config.feature_dim,
          "feature dimension does not match config");
  require(features.rows() >= 1, "utterance has no frames");

  ForwardCache cache;
  cache.features = features;
  Matrix acts = features;
  cache.activations.reserve(params.frame_layers.size());
  for (const auto& layer : params.frame_layers) {
    acts = affine_tanh(acts, layer);
    cache.activations.push_back(acts);
  }
  const long frames = acts.rows();

  if (config.pooling == Pooling::kStats) {
    require(frames >= 2, "stats pooling needs at least two frames");
    cache.attn_weights =
        Vector::Constant(frames, 1.0 / static_cast<double>(frames));
  } else {
    const auto& attn = *params.attention;
    cache.condition =
        condition_vector(features, config.attention->condition_dim);
    Vector gate = attn.gate_weight * cache.condition + attn.gate_bias;
    for (long i = 0; i < gate.size(); ++i) {
      gate(i) = losses::logistic(gate(i));
    }
    cache.gate_sigmoid = gate;
    cache.gate_linear =
        attn.transform_weight * cache.condition + attn.transform_bias;
    cache.condition_gated = cache.gate_sigmoid.cwiseProduct(cache.gate_linear);

    cache.energy_tanh = Matrix(frames, attn.energy_vector.size());
    Vector energies(frames);
    for (long f = 0; f < frames; ++f) {
      Vector joint(acts.cols() + cache.condition_gated.size());
      joint << acts.row(f).transpose(), cache.condition_gated;
      const Vector t =
          (attn.energy_weight * joint + attn.energy_bias).array().tanh().matrix();
      cache.energy_tanh.row(f) = t.transpose();
      energies(f) = attn.energy_vector.dot(t);
    }
    cache.attn_weights = softmax_vector(energies);
  }

  pool_with_weights(acts, cache.attn_weights, cache.mean, cache.stddev);
  cache.pooled = Vector(2 * acts.cols());
  cache.pooled << cache.mean, cache.stddev;
  cache.embedding =
      params.embed_layer.weight * cache.pooled + params.embed_layer.bias;
  cache.logits = classify(params, cache.embedding);
  return cache;
}

void backward(const ModelConfig& config, const ModelParams& params,
              const ForwardCache& cache, const Vector& dlogits,
              ModelGrads& grads) {
  require(cache.pooled.size() > 0, "forward cache is missing");
  require(cache.logits.size() == dlogits.size(),
          "upstream gradient does not match logits");

  // Classification layer.
  grads.classifier_weight += cache.embedding * dlogits.transpose();
  grads.classifier_bias += dlogits;
  const Vector d_embedding = params.classifier_weight * dlogits;

  // Embedding layer.
  grads.embed_layer.weight += d_embedding * cache.pooled.transpose();
  grads.embed_layer.bias += d_embedding;
  const Vector d_pooled = params.embed_layer.weight.transpose() * d_embedding;

  const Matrix& acts =
      cache.activations.empty() ? cache.features : cache.activations.back();
  const long frames = acts.rows();
  const long hidden = acts.cols();
  const Vector d_mean = d_pooled.head(hidden);
  const Vector d_std = d_pooled.tail(hidden);
  const Vector& weights = cache.attn_weights;

  // Pooling backward, direct path into the frame activations. The term
  // through the mean inside the std cancels because the weights sum to one.
  const Matrix centered = acts.rowwise() - cache.mean.transpose();
  const Vector std_ratio = d_std.cwiseQuotient(cache.stddev);
  Matrix d_acts(frames, hidden);
  for (long f = 0; f < frames; ++f) {
    d_acts.row(f) =
        weights(f) *
        (d_mean + std_ratio.cwiseProduct(centered.row(f).transpose()))
            .transpose();
  }

  if (config.pooling == Pooling::kAttention) {
    const auto& attn = *params.attention;
    auto& attn_grads = *grads.attention;

    // d(loss)/d(attention weight a_f).
    const Vector half_ratio = d_std.cwiseQuotient(2.0 * cache.stddev);
    Vector d_weights = acts * d_mean;
    for (long f = 0; f < frames; ++f) {
      d_weights(f) +=
          centered.row(f).cwiseProduct(centered.row(f)).dot(
              half_ratio.transpose());
    }

    // Softmax backward.
    const double inner = weights.dot(d_weights);
    const Vector d_energies = weights.cwiseProduct(
        d_weights - Vector::Constant(frames, inner));

    // Energies e_f = v . tanh(Wh [h_f ; c'] + bh).
    attn_grads.energy_vector += cache.energy_tanh.transpose() * d_energies;
    Vector d_gated = Vector::Zero(cache.condition_gated.size());
    for (long f = 0; f < frames; ++f) {
      const Vector t = cache.energy_tanh.row(f).transpose();
      const Vector d_pre = (d_energies(f) * attn.energy_vector.array() *
                            (1.0 - t.array().square()))
                               .matrix();
      Vector joint(hidden + cache.condition_gated.size());
      joint << acts.row(f).transpose(), cache.condition_gated;
      attn_grads.energy_weight += d_pre * joint.transpose();
      attn_grads.energy_bias += d_pre;
      d_acts.row(f) +=
          (attn.energy_weight.leftCols(hidden).transpose() * d_pre)
              .transpose();
      d_gated += attn.energy_weight.rightCols(cache.condition_gated.size())
                     .transpose() *
                 d_pre;
    }

    // Gating c' = sigmoid(gate) .* linear. The condition vector itself is a
    // fixed function of the features, so no gradient flows past it.
    const Vector d_gate_sig = d_gated.cwiseProduct(cache.gate_linear);
    const Vector d_linear = d_gated.cwiseProduct(cache.gate_sigmoid);
    const Vector one_minus = Vector::Ones(cache.gate_sigmoid.size()) -
                             cache.gate_sigmoid;
    const Vector d_gate_pre =
        d_gate_sig.cwiseProduct(cache.gate_sigmoid).cwiseProduct(one_minus);
    attn_grads.gate_weight += d_gate_pre * cache.condition.transpose();
    attn_grads.gate_bias += d_gate_pre;
    attn_grads.transform_weight += d_linear * cache.condition.transpose();
    attn_grads.transform_bias += d_linear;
  }

  // Frame layer stack, from the last layer down to the input.
  Matrix d_current = std::move(d_acts);
  for (long layer_idx = static_cast<long>(params.frame_layers.size()) - 1;
       layer_idx >= 0; --layer_idx) {
    const Matrix& out_acts = cache.activations[static_cast<size_t>(layer_idx)];
    const Matrix& in_acts =
        layer_idx == 0 ? cache.features
                       : cache.activations[static_cast<size_t>(layer_idx - 1)];
    const Matrix d_pre =
        (d_current.array() * (1.0 - out_acts.array().square())).matrix();
    auto& layer_grads = grads.frame_layers[static_cast<size_t>(layer_idx)];
    layer_grads.weight += d_pre.transpose() * in_acts;
    layer_grads.bias += d_pre.colwise().sum().transpose();
    d_current =
        d_pre * params.frame_layers[static_cast<size_t>(layer_idx)].weight;
  }
}

}  // namespace cllrce::model
