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

#include "cllrce/losses.hpp"

#include <cmath>

namespace cllrce::losses {

namespace {

constexpr double kLn2 = 0.6931471805599453;

void check_batch(const LogitBatch& logits, const LabelBatch& labels) {
  const long m = logits.rows();
  const long n = logits.cols();
  require(m >= 1, "LogitBatch needs at least one row");
  require(n >= 2, "LogitBatch needs at least two speaker columns");
  require(logits.values.allFinite(), "LogitBatch entries must be finite");
  require(static_cast<long>(labels.labels.size()) == m,
          "LabelBatch length must match LogitBatch rows");
  for (int label : labels.labels) {
    require(label >= 0 && label < n, "speaker label out of range");
  }
}

}  // namespace

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

LossOutput ce_loss(const LogitBatch& logits, const LabelBatch& labels) {
  check_batch(logits, labels);
  const long m = logits.rows();
  const long n = logits.cols();

  LossOutput out;
  out.grad = Matrix::Zero(m, n);
  double total = 0.0;
  for (long i = 0; i < m; ++i) {
    const double shift = logits.values.row(i).maxCoeff();
    double sum_exp = 0.0;
    for (long j = 0; j < n; ++j) {
      sum_exp += std::exp(logits.values(i, j) - shift);
    }
    const double log_sum_exp = shift + std::log(sum_exp);
    const int label = labels.labels[static_cast<size_t>(i)];
    total += log_sum_exp - logits.values(i, label);
    for (long j = 0; j < n; ++j) {
      const double p = std::exp(logits.values(i, j) - shift) / sum_exp;
      out.grad(i, j) = p / static_cast<double>(m);
    }
    out.grad(i, label) -= 1.0 / static_cast<double>(m);
  }
  out.value = total / static_cast<double>(m);
  return out;
}

ScorePartition partition_scores(const LogitBatch& logits,
                                const LabelBatch& labels) {
  check_batch(logits, labels);
  const long m = logits.rows();
  const long n = logits.cols();

  ScorePartition part;
  part.target_scores.reserve(static_cast<size_t>(m));
  part.nontarget_scores.reserve(static_cast<size_t>(m * (n - 1)));
  for (long i = 0; i < m; ++i) {
    const int label = labels.labels[static_cast<size_t>(i)];
    part.target_scores.push_back(logits.values(i, label));
    for (long j = 0; j < n; ++j) {
      if (j != label) part.nontarget_scores.push_back(logits.values(i, j));
    }
  }
  return part;
}

double cllr_from_scores(const ScorePartition& part) {
  require(!part.target_scores.empty(), "Cllr needs at least one target score");
  require(!part.nontarget_scores.empty(),
          "Cllr needs at least one non-target score");

  double c_tar = 0.0;
  for (double s : part.target_scores) c_tar += softplus(-s);
  double c_non = 0.0;
  for (double s : part.nontarget_scores) c_non += softplus(s);

  const double n_tar = static_cast<double>(part.target_scores.size());
  const double n_non = static_cast<double>(part.nontarget_scores.size());
  return 0.5 * (c_tar / n_tar + c_non / n_non) / kLn2;
}

LossOutput cllr_loss(const LogitBatch& logits, const LabelBatch& labels) {
  check_batch(logits, labels);
  const long m = logits.rows();
  const long n = logits.cols();

  LossOutput out;
  out.value = cllr_from_scores(partition_scores(logits, labels));
  out.grad = Matrix::Zero(m, n);

  const double n_tar = static_cast<double>(m);
  const double n_non = static_cast<double>(m * (n - 1));
  for (long i = 0; i < m; ++i) {
    const int label = labels.labels[static_cast<size_t>(i)];
    for (long j = 0; j < n; ++j) {
      const double s = logits.values(i, j);
      if (j == label) {
        out.grad(i, j) = -0.5 * logistic(-s) / (n_tar * kLn2);
      } else {
        out.grad(i, j) = 0.5 * logistic(s) / (n_non * kLn2);
      }
    }
  }
  return out;
}

LossOutput cllr_ce_loss(const LogitBatch& logits, const LabelBatch& labels) {
  const LossOutput cllr = cllr_loss(logits, labels);
  const LossOutput ce = ce_loss(logits, labels);
  LossOutput out;
  out.value = 0.5 * (cllr.value + ce.value);
  out.grad = 0.5 * (cllr.grad + ce.grad);
  return out;
}

}  // namespace cllrce::losses
