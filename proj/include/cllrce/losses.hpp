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

#include <vector>

#include "cllrce/common.hpp"
#include "cllrce/scores.hpp"

namespace cllrce::losses {

/// Last-linear-layer scores for a minibatch: one row per sample, one column
/// per training speaker. All loss functions read this matrix directly.
struct LogitBatch {
  Matrix values;  // m x N

  long rows() const { return values.rows(); }
  long cols() const { return values.cols(); }
};

/// True speaker index per sample, paired with a LogitBatch of the same m.
struct LabelBatch {
  std::vector<int> labels;
};

/// A loss value together with its analytic gradient w.r.t. every logit.
struct LossOutput {
  double value = 0.0;
  Matrix grad;  // same shape as the input LogitBatch
};

using ScorePartition = ScoreSet;

/// Numerically stable softplus: log(1 + e^x) = max(x,0) + log1p(e^-|x|).
double softplus(double x);

/// Logistic function, stable for large |x|.
double logistic(double x);

/// Mean multi-class cross-entropy over the batch, natural log, with the
/// log-sum-exp max shift. grad[i] = (softmax(logits[i]) - onehot(label_i))/m.
LossOutput ce_loss(const LogitBatch& logits, const LabelBatch& labels);

/// Splits minibatch logits into target scores (the true-speaker logit of
/// each sample, row order) and non-target scores (all remaining logits,
/// row-major order).
ScorePartition partition_scores(const LogitBatch& logits,
                                const LabelBatch& labels);

/// Closed-form log-likelihood-ratio cost:
///   1/2 * ( mean over targets of log2(1+e^-s) +
///           mean over non-targets of log2(1+e^s) ).
/// 1.0 for all-zero (uninformative) scores, 0 for perfect separation.
double cllr_from_scores(const ScorePartition& part);

/// Cllr of the minibatch score partition, with analytic gradients:
/// for a target logit s, d/ds = -sigma(-s) / (2 * N_tar * ln 2);
/// for a non-target logit s, d/ds = sigma(s) / (2 * N_non * ln 2).
LossOutput cllr_loss(const LogitBatch& logits, const LabelBatch& labels);

/// Equal-weight combination: value and gradient are the arithmetic mean of
/// the Cllr and CE losses.
LossOutput cllr_ce_loss(const LogitBatch& logits, const LabelBatch& labels);

}  // namespace cllrce::losses
