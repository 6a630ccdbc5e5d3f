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

#include <cmath>

#include <doctest.h>

#include "cllrce/metrics.hpp"
#include "oracles.hpp"

using namespace cllrce;
using namespace cllrce::scoring;

namespace {

EmbeddedUtterance make_utt(Vector embedding, int speaker, int style,
                           int cell, synthdata::Split split) {
  EmbeddedUtterance utt;
  utt.embedding = std::move(embedding);
  utt.speaker_id = speaker;
  utt.style_id = style;
  utt.cell_index = cell;
  utt.split = split;
  return utt;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_SUITE("scoring") {

TEST_CASE("build_trials pairs every enrollment with every test utterance") {
  std::vector<EmbeddedUtterance> utts;
  utts.push_back(make_utt(vec2(1, 0), 0, 0, 0, synthdata::Split::kEnroll));
  utts.push_back(make_utt(vec2(0, 1), 1, 0, 0, synthdata::Split::kEnroll));
  utts.push_back(make_utt(vec2(1, 0.1), 0, 1, 0, synthdata::Split::kTest));
  utts.push_back(make_utt(vec2(0.1, 1), 1, 1, 0, synthdata::Split::kTest));

  const auto trials = build_trials(utts, 0, 1);
  CHECK(trials.size() == 4);
  int targets = 0;
  for (const auto& trial : trials) {
    if (trial.is_target) ++targets;
  }
  CHECK(targets == 2);

  CHECK_THROWS_AS(build_trials(utts, 2, 1), ContractError);
}

TEST_CASE("build_trials excludes reused self pairs") {
  std::vector<EmbeddedUtterance> utts;
  utts.push_back(
      make_utt(vec2(1, 0), 0, 0, 0, synthdata::Split::kEnrollTest));
  utts.push_back(
      make_utt(vec2(0, 1), 1, 0, 0, synthdata::Split::kEnrollTest));
  const auto trials = build_trials(utts, 0, 0);
  // Only the cross-speaker pairs survive.
  CHECK(trials.size() == 2);
  for (const auto& trial : trials) {
    CHECK_FALSE(trial.is_target);
  }
}

TEST_CASE("build_trials counts match the closed form") {
  // 5 speakers, 2 styles, 2 test utterances per cell, 1 enrollment per cell.
  std::vector<EmbeddedUtterance> utts;
  std::mt19937_64 rng(3);
  for (int speaker = 0; speaker < 5; ++speaker) {
    for (int style = 0; style < 2; ++style) {
      utts.push_back(make_utt(
          oracles::random_matrix(rng, 3, 1, -1, 1).col(0), speaker, style, 0,
          synthdata::Split::kEnroll));
      for (int cell = 1; cell <= 2; ++cell) {
        utts.push_back(make_utt(
            oracles::random_matrix(rng, 3, 1, -1, 1).col(0), speaker, style,
            cell, synthdata::Split::kTest));
      }
    }
  }
  const auto trials = build_trials(utts, 0, 1);
  long targets = 0;
  long nontargets = 0;
  for (const auto& trial : trials) {
    (trial.is_target ? targets : nontargets) += 1;
  }
  CHECK(targets == 5 * 2);
  CHECK(nontargets == 5 * 4 * 2);
}

TEST_CASE("enroll averages length-normalized embeddings") {
  const EnrollmentModel single = enroll({vec2(3, 4)}, 7, 1);
  CHECK(single.vector(0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(single.vector(1) == doctest::Approx(0.8).epsilon(1e-12));

  const EnrollmentModel twin = enroll({vec2(2, 0), vec2(5, 0)}, 7, 1);
  CHECK(twin.vector(0) == doctest::Approx(1.0).epsilon(1e-12));

  std::mt19937_64 rng(5);
  std::vector<Vector> members;
  for (int i = 0; i < 4; ++i) {
    members.push_back(oracles::random_matrix(rng, 6, 1, -2, 2).col(0));
  }
  const EnrollmentModel model = enroll(members, 1, 0);
  Vector expected = Vector::Zero(6);
  for (const Vector& m : members) expected += m / m.norm();
  expected /= 4.0;
  expected /= expected.norm();
  CHECK((model.vector - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(model.vector.norm() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(enroll({Vector::Zero(3)}, 0, 0), ContractError);
}

TEST_CASE("cosine_score basics and scale invariance") {
  CHECK(cosine_score(vec2(1, 1), vec2(2, 2)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine_score(vec2(1, 0), vec2(0, 5)) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cosine_score(vec2(1, 2), vec2(-2, -4)) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  std::mt19937_64 rng(7);
  const Vector a = oracles::random_matrix(rng, 5, 1, -1, 1).col(0);
  const Vector b = oracles::random_matrix(rng, 5, 1, -1, 1).col(0);
  CHECK(cosine_score(a, b) ==
        doctest::Approx(cosine_score(3.7 * a, 0.2 * b)).epsilon(1e-12));
  CHECK_THROWS_AS(cosine_score(Vector::Zero(5), b), ContractError);
}

TEST_CASE("fit_two_cov on constructed geometry") {
  const Vector e1 = vec2(1, 0);
  const std::vector<Vector> embeddings = {e1, e1, -e1, -e1};
  const std::vector<int> labels = {0, 0, 1, 1};
  const TwoCovModel model = fit_two_cov(embeddings, labels);
  CHECK(model.mean.cwiseAbs().maxCoeff() < 1e-15);
  CHECK(model.between(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(model.between(0, 1)) < 1e-15);
  CHECK(std::abs(model.between(1, 1)) < 1e-15);
  CHECK(model.within(0, 0) == doctest::Approx(1e-6).epsilon(1e-9));
  CHECK(model.within(1, 1) == doctest::Approx(1e-6).epsilon(1e-9));

  CHECK_THROWS_AS(fit_two_cov({e1, e1}, {0, 0}), ContractError);
  CHECK_THROWS_AS(fit_two_cov({e1, -e1}, {0, 1}), ContractError);
}

TEST_CASE("label shuffling shrinks the between-speaker scatter") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vector> embeddings;
  std::vector<int> labels;
  std::vector<int> shuffled;
  for (int speaker = 0; speaker < 10; ++speaker) {
    Vector mean(3);
    for (long d = 0; d < 3; ++d) mean(d) = 3.0 * gauss(rng);
    for (int i = 0; i < 20; ++i) {
      Vector x = mean;
      for (long d = 0; d < 3; ++d) x(d) += 0.3 * gauss(rng);
      embeddings.push_back(x);
      labels.push_back(speaker);
      shuffled.push_back(static_cast<int>(rng() % 10));
    }
  }
  const TwoCovModel truthful = fit_two_cov(embeddings, labels);
  const TwoCovModel permuted = fit_two_cov(embeddings, shuffled);
  CHECK(permuted.between.trace() < truthful.between.trace());
}

TEST_CASE("fit_two_cov recovers known 1-D variances") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sigma_b = 1.0;
  const double sigma_w = 0.5;
  std::vector<Vector> embeddings;
  std::vector<int> labels;
  for (int speaker = 0; speaker < 100; ++speaker) {
    const double mean = sigma_b * gauss(rng);
    for (int i = 0; i < 100; ++i) {
      Vector x(1);
      x << mean + sigma_w * gauss(rng);
      embeddings.push_back(x);
      labels.push_back(speaker);
    }
  }
  const TwoCovModel model = fit_two_cov(embeddings, labels);
  CHECK(model.between(0, 0) ==
        doctest::Approx(sigma_b * sigma_b).epsilon(0.10));
  CHECK(model.within(0, 0) ==
        doctest::Approx(sigma_w * sigma_w).epsilon(0.10));
}

TEST_CASE("two_cov_score ordering, symmetry, and quadrature oracle") {
  // Hand-built 1-D model.
  std::vector<Vector> embeddings;
  std::vector<int> labels;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int speaker = 0; speaker < 50; ++speaker) {
    const double mean = gauss(rng);
    for (int i = 0; i < 10; ++i) {
      Vector x(1);
      x << mean + 0.4 * gauss(rng);
      embeddings.push_back(x);
      labels.push_back(speaker);
    }
  }
  const TwoCovModel model = fit_two_cov(embeddings, labels);
  const double mu = model.mean(0);
  const double b = model.between(0, 0);
  const double w = model.within(0, 0);

  Vector at_mean(1);
  at_mean << mu;
  Vector far_plus(1);
  far_plus << mu + 3.0 * std::sqrt(b);
  Vector far_minus(1);
  far_minus << mu - 3.0 * std::sqrt(b);
  CHECK(two_cov_score(model, at_mean, at_mean) >
        two_cov_score(model, far_plus, far_minus));

  for (const auto& [x, y] : std::vector<std::pair<double, double>>{
           {mu + 0.5, mu + 0.3}, {mu - 1.2, mu + 0.8}, {mu, mu + 2.0}}) {
    Vector e1(1);
    Vector e2(1);
    e1 << x;
    e2 << y;
    const double closed = two_cov_score(model, e1, e2);
    const double log_same = oracles::quadrature_log_same(x, y, mu, b, w);
    const double log_diff =
        std::log(oracles::gaussian_pdf(x, mu, b + w)) +
        std::log(oracles::gaussian_pdf(y, mu, b + w));
    CHECK(closed == doctest::Approx(log_same - log_diff).epsilon(1e-8));
    CHECK(two_cov_score(model, e1, e2) == two_cov_score(model, e2, e1));
  }
}

TEST_CASE("two_cov beats cosine under anisotropic within-speaker noise") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // Speaker means isotropic; within-speaker noise dominated by dim 0.
    std::vector<Vector> train_embeddings;
    std::vector<int> train_labels;
    std::vector<EmbeddedUtterance> utts;
    for (int speaker = 0; speaker < 30; ++speaker) {
      Vector mean(2);
      mean << gauss(rng), gauss(rng);
      mean += vec2(4, 4);  // keep away from the origin for cosine
      for (int i = 0; i < 6; ++i) {
        Vector x = mean + vec2(2.0 * gauss(rng), 0.05 * gauss(rng));
        if (i < 3) {
          train_embeddings.push_back(x);
          train_labels.push_back(speaker);
        } else {
          utts.push_back(make_utt(x, speaker, 0, i,
                                  i == 3 ? synthdata::Split::kEnroll
                                         : synthdata::Split::kTest));
        }
      }
    }
    const auto trials = build_trials(utts, 0, 0);

    ScoringBackend cosine;
    const double eer_cosine =
        metrics::eer(score_trials(trials, utts, cosine).scores);
    ScoringBackend twocov;
    twocov.kind = BackendKind::kTwoCov;
    twocov.two_cov = fit_two_cov(train_embeddings, train_labels);
    // Score raw (un-normalized) embeddings through the model directly so
    // the fit and the trials live in the same space.
    ScoreSet twocov_scores;
    for (const auto& trial : trials) {
      const Vector& test = utts[trial.test_index].embedding;
      Vector enroll_vec;
      for (const auto& utt : utts) {
        if (utt.speaker_id == trial.enroll_speaker &&
            utt.split == synthdata::Split::kEnroll) {
          enroll_vec = utt.embedding;
        }
      }
      const double score =
          two_cov_score(*twocov.two_cov, enroll_vec, test);
      (trial.is_target ? twocov_scores.target_scores
                       : twocov_scores.nontarget_scores)
          .push_back(score);
    }
    CHECK(metrics::eer(twocov_scores) < eer_cosine);
  }
}

TEST_CASE("score_trials is order-preserving and complete") {
  std::vector<EmbeddedUtterance> utts;
  utts.push_back(make_utt(vec2(1, 0), 0, 0, 0, synthdata::Split::kEnroll));
  utts.push_back(make_utt(vec2(0.9, 0.1), 0, 1, 0, synthdata::Split::kTest));
  utts.push_back(make_utt(vec2(0, 1), 1, 0, 0, synthdata::Split::kEnroll));
  utts.push_back(make_utt(vec2(0.2, 1), 1, 1, 0, synthdata::Split::kTest));

  const auto trials = build_trials(utts, 0, 1);
  const ScoringResult result = score_trials(trials, utts, {});
  REQUIRE(result.trials.size() == trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    CHECK(result.trials[i].trial.test_index == trials[i].test_index);
  }
  CHECK(result.scores.target_scores.size() == 2);
  CHECK(result.scores.nontarget_scores.size() == 2);

  // Single-trial and all-target cases.
  const std::vector<Trial> one = {trials.front()};
  const ScoringResult single = score_trials(one, utts, {});
  CHECK(single.trials.size() == 1);

  std::vector<Trial> all_target;
  for (const auto& trial : trials) {
    if (trial.is_target) all_target.push_back(trial);
  }
  const ScoringResult targets_only = score_trials(all_target, utts, {});
  CHECK(targets_only.scores.nontarget_scores.empty());
  CHECK(targets_only.scores.target_scores.size() == all_target.size());
}

}  // TEST_SUITE
