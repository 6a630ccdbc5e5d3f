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

#include <cstddef>
#include <optional>
#include <vector>

#include "cllrce/common.hpp"
#include "cllrce/scores.hpp"
#include "cllrce/synthdata.hpp"

namespace cllrce::scoring {

/// An utterance-level embedding with its corpus metadata.
struct EmbeddedUtterance {
  Vector embedding;
  int speaker_id = 0;
  int style_id = 0;
  int cell_index = 0;
  synthdata::Split split = synthdata::Split::kTest;
};

/// One verification trial: a (speaker, style) enrollment against a test
/// utterance (index into the embedding list).
struct Trial {
  int enroll_speaker = 0;
  int enroll_style = 0;
  std::size_t test_index = 0;
  bool is_target = false;
};

/// Normalized mean of length-normalized enrollment embeddings.
struct EnrollmentModel {
  int speaker_id = 0;
  int style_id = 0;
  Vector vector;  // unit length
};

/// Two-covariance Gaussian backend: speaker means are drawn around a global
/// mean with between-speaker covariance, observations around the speaker
/// mean with within-speaker covariance. Factorizations are prepared at fit
/// time; scoring costs one triangular solve per covariance.
struct TwoCovModel {
  Vector mean;
  Matrix between;  // B, positive semi-definite
  Matrix within;   // W, positive definite (regularized)

  Eigen::LLT<Matrix> chol_within;       // W
  Eigen::LLT<Matrix> chol_marginal;     // B + W
  Eigen::LLT<Matrix> chol_same_joint;   // 2B + W
  double logdet_within = 0.0;
  double logdet_marginal = 0.0;
  double logdet_same_joint = 0.0;
};

enum class BackendKind { kCosine, kTwoCov };

struct ScoringBackend {
  BackendKind kind = BackendKind::kCosine;
  std::optional<TwoCovModel> two_cov;  // required for kTwoCov
};

struct ScoredTrial {
  Trial trial;
  double score = 0.0;
};

struct ScoringResult {
  std::vector<ScoredTrial> trials;  // input trial order
  ScoreSet scores;                  // partitioned by is_target, trial order
};

/// All (enrollment, test utterance) pairs for one (enroll style, test
/// style) condition. Target iff speakers match. A test utterance that was
/// itself part of an enrollment (the single-utterance-reuse case) never
/// scores against that enrollment. Order: enrollment speakers ascending,
/// then test utterances in list order.
std::vector<Trial> build_trials(const std::vector<EmbeddedUtterance>& utts,
                                int enroll_style, int test_style);

/// Length-normalize each embedding, average, re-normalize.
EnrollmentModel enroll(const std::vector<Vector>& embeddings, int speaker_id,
                       int style_id);

/// Inner product of the unit-normalized vectors, in [-1, 1].
double cosine_score(const Vector& enrollment, const Vector& test_embedding);

/// Global mean, pooled within-speaker scatter (regularized by 1e-6 I), and
/// the unweighted scatter of speaker means. Needs >= 2 speakers and a
/// repeated speaker.
TwoCovModel fit_two_cov(const std::vector<Vector>& embeddings,
                        const std::vector<int>& speaker_labels);

/// Closed-form Gaussian log-likelihood ratio
///   log p(e1, e2 | same speaker) - log p(e1, e2 | different speakers)
/// under the two-covariance model; symmetric in its embedding arguments.
double two_cov_score(const TwoCovModel& model, const Vector& enroll_vec,
                     const Vector& test_vec);

/// Scores every trial with the chosen backend over length-normalized
/// embeddings, preserving trial order.
ScoringResult score_trials(const std::vector<Trial>& trials,
                           const std::vector<EmbeddedUtterance>& utts,
                           const ScoringBackend& backend);

}  // namespace cllrce::scoring
