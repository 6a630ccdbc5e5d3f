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

#include "cllrce/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace cllrce::scoring {

namespace {

constexpr double kWithinRegularization = 1e-6;

bool in_enrollment(const synthdata::Split split) {
  return split == synthdata::Split::kEnroll ||
         split == synthdata::Split::kEnrollTest;
}

bool in_test(const synthdata::Split split) {
  return split == synthdata::Split::kTest ||
         split == synthdata::Split::kEnrollTest;
}

Vector normalized(const Vector& v, const char* what) {
  const double norm = v.norm();
  require(norm > 0.0, std::string(what) + " has zero norm");
  return v / norm;
}

double log_det_from_llt(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// x^T C^{-1} x via the prepared Cholesky factor.
double quad_form(const Eigen::LLT<Matrix>& llt, const Vector& x) {
  const Vector y = llt.matrixL().solve(x);
  return y.squaredNorm();
}

}  // namespace

std::vector<Trial> build_trials(const std::vector<EmbeddedUtterance>& utts,
                                int enroll_style, int test_style) {
  std::set<int> enroll_speakers;
  bool enroll_style_seen = false;
  bool test_style_seen = false;
  for (const auto& utt : utts) {
    if (utt.style_id == enroll_style) enroll_style_seen = true;
    if (utt.style_id == test_style) test_style_seen = true;
    if (utt.style_id == enroll_style && in_enrollment(utt.split)) {
      enroll_speakers.insert(utt.speaker_id);
    }
  }
  require(enroll_style_seen, "enroll style not present in the corpus");
  require(test_style_seen, "test style not present in the corpus");

  std::vector<std::size_t> test_utts;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    if (utts[i].style_id == test_style && in_test(utts[i].split)) {
      test_utts.push_back(i);
    }
  }

  std::vector<Trial> trials;
  for (int speaker : enroll_speakers) {
    for (std::size_t i : test_utts) {
      const auto& test_utt = utts[i];
      // A reused utterance never scores against the enrollment it is in.
      if (test_utt.split == synthdata::Split::kEnrollTest &&
          test_utt.speaker_id == speaker &&
          test_utt.style_id == enroll_style) {
        continue;
      }
      trials.push_back(
          {speaker, enroll_style, i, test_utt.speaker_id == speaker});
    }
  }
  require(!trials.empty(), "trial set is empty for this style pair");
  return trials;
}

EnrollmentModel enroll(const std::vector<Vector>& embeddings, int speaker_id,
                       int style_id) {
  require(!embeddings.empty(), "enrollment needs at least one embedding");
  Vector sum = Vector::Zero(embeddings.front().size());
  for (const Vector& e : embeddings) {
    require(e.size() == sum.size(), "enrollment embeddings differ in size");
    sum += normalized(e, "enrollment embedding");
  }
  sum /= static_cast<double>(embeddings.size());
  EnrollmentModel model;
  model.speaker_id = speaker_id;
  model.style_id = style_id;
  model.vector = normalized(sum, "averaged enrollment");
  return model;
}

double cosine_score(const Vector& enrollment, const Vector& test_embedding) {
  require(enrollment.size() == test_embedding.size(),
          "embedding sizes differ");
  return normalized(enrollment, "enrollment vector")
      .dot(normalized(test_embedding, "test embedding"));
}

TwoCovModel fit_two_cov(const std::vector<Vector>& embeddings,
                        const std::vector<int>& speaker_labels) {
  require(embeddings.size() == speaker_labels.size(),
          "embedding and label counts differ");
  require(!embeddings.empty(), "no embeddings to fit");
  const long dim = embeddings.front().size();

  std::map<int, std::vector<std::size_t>> by_speaker;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    require(embeddings[i].size() == dim, "embeddings differ in size");
    by_speaker[speaker_labels[i]].push_back(i);
  }
  require(by_speaker.size() >= 2, "two-covariance fit needs >= 2 speakers");
  bool repeated = false;
  for (const auto& [spk, members] : by_speaker) {
    if (members.size() >= 2) repeated = true;
  }
  require(repeated,
          "two-covariance fit needs >= 2 embeddings for some speaker");

  TwoCovModel model;
  model.mean = Vector::Zero(dim);
  for (const Vector& e : embeddings) model.mean += e;
  model.mean /= static_cast<double>(embeddings.size());

  Matrix within = Matrix::Zero(dim, dim);
  Matrix between = Matrix::Zero(dim, dim);
  for (const auto& [spk, members] : by_speaker) {
    Vector speaker_mean = Vector::Zero(dim);
    for (std::size_t i : members) speaker_mean += embeddings[i];
    speaker_mean /= static_cast<double>(members.size());
    for (std::size_t i : members) {
      const Vector d = embeddings[i] - speaker_mean;
      within += d * d.transpose();
    }
    const Vector b = speaker_mean - model.mean;
    between += b * b.transpose();
  }
  within /= static_cast<double>(embeddings.size());
  within += kWithinRegularization * Matrix::Identity(dim, dim);
  between /= static_cast<double>(by_speaker.size());

  model.within = within;
  model.between = between;
  model.chol_within.compute(within);
  model.chol_marginal.compute(between + within);
  model.chol_same_joint.compute(2.0 * between + within);
  require(model.chol_within.info() == Eigen::Success &&
              model.chol_marginal.info() == Eigen::Success &&
              model.chol_same_joint.info() == Eigen::Success,
          "two-covariance model is singular");
  model.logdet_within = log_det_from_llt(model.chol_within);
  model.logdet_marginal = log_det_from_llt(model.chol_marginal);
  model.logdet_same_joint = log_det_from_llt(model.chol_same_joint);
  return model;
}

double two_cov_score(const TwoCovModel& model, const Vector& enroll_vec,
                     const Vector& test_vec) {
  require(model.mean.size() > 0, "two-covariance model is not fitted");
  require(enroll_vec.size() == model.mean.size() &&
              test_vec.size() == model.mean.size(),
          "embedding size does not match the model");

  // Rotate the pair into independent sum/difference coordinates: the sum
  // component has covariance 2B+W under the same-speaker hypothesis and B+W
  // under the different-speaker one; the difference component has W vs B+W.
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const Vector sum = (enroll_vec - model.mean + test_vec - model.mean) *
                     inv_sqrt2;
  const Vector diff = (enroll_vec - test_vec) * inv_sqrt2;

  const double log_same = -0.5 * (model.logdet_same_joint +
                                  quad_form(model.chol_same_joint, sum) +
                                  model.logdet_within +
                                  quad_form(model.chol_within, diff));
  const double log_diff = -0.5 * (model.logdet_marginal +
                                  quad_form(model.chol_marginal, sum) +
                                  model.logdet_marginal +
                                  quad_form(model.chol_marginal, diff));
  return log_same - log_diff;
}

ScoringResult score_trials(const std::vector<Trial>& trials,
                           const std::vector<EmbeddedUtterance>& utts,
                           const ScoringBackend& backend) {
  require(!trials.empty(), "no trials to score");
  if (backend.kind == BackendKind::kTwoCov) {
    require(backend.two_cov.has_value(),
            "two-covariance backend is missing its fitted model");
  }

  // Enrollment models, built once per (speaker, style).
  std::map<std::pair<int, int>, EnrollmentModel> enrollments;
  for (const Trial& trial : trials) {
    const auto key = std::make_pair(trial.enroll_speaker, trial.enroll_style);
    if (enrollments.count(key) > 0) continue;
    std::vector<Vector> members;
    for (const auto& utt : utts) {
      if (utt.speaker_id == trial.enroll_speaker &&
          utt.style_id == trial.enroll_style && in_enrollment(utt.split)) {
        members.push_back(utt.embedding);
      }
    }
    require(!members.empty(), "trial references an empty enrollment");
    enrollments.emplace(key,
                        enroll(members, trial.enroll_speaker,
                               trial.enroll_style));
  }

  ScoringResult result;
  result.trials.reserve(trials.size());
  for (const Trial& trial : trials) {
    require(trial.test_index < utts.size(),
            "trial references an unknown test utterance");
    const EnrollmentModel& enrollment =
        enrollments.at({trial.enroll_speaker, trial.enroll_style});
    const Vector test =
        normalized(utts[trial.test_index].embedding, "test embedding");
    double score = 0.0;
    if (backend.kind == BackendKind::kCosine) {
      score = enrollment.vector.dot(test);
    } else {
      score = two_cov_score(*backend.two_cov, enrollment.vector, test);
    }
    result.trials.push_back({trial, score});
    (trial.is_target ? result.scores.target_scores
                     : result.scores.nontarget_scores)
        .push_back(score);
  }
  return result;
}

}  // namespace cllrce::scoring
