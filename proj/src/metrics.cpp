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

#include "cllrce/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cllrce/common.hpp"
#include "cllrce/losses.hpp"

namespace cllrce::metrics {

namespace {

void check_scores(const ScoreSet& scores) {
  require(!scores.target_scores.empty(), "ScoreSet has no target scores");
  require(!scores.nontarget_scores.empty(),
          "ScoreSet has no non-target scores");
  for (double s : scores.target_scores) {
    require(std::isfinite(s), "target score must be finite");
  }
  for (double s : scores.nontarget_scores) {
    require(std::isfinite(s), "non-target score must be finite");
  }
}

// Cumulative probability P(Bin(n, 1/2) <= k).
double binomial_half_cdf(std::int64_t n, std::int64_t k) {
  double coeff = 1.0;  // C(n, 0)
  double sum = 1.0;
  for (std::int64_t j = 1; j <= k; ++j) {
    coeff *= static_cast<double>(n - j + 1) / static_cast<double>(j);
    sum += coeff;
  }
  return sum * std::exp2(-static_cast<double>(n));
}

// Survival function of the chi-square distribution with one degree of
// freedom: P(X > x) = erfc(sqrt(x/2)).
double chi_square_1df_sf(double x) { return std::erfc(std::sqrt(x / 2.0)); }

}  // namespace

std::vector<DetPoint> det_points(const ScoreSet& scores) {
  check_scores(scores);
  std::vector<double> targets = scores.target_scores;
  std::vector<double> nontargets = scores.nontarget_scores;
  std::sort(targets.begin(), targets.end());
  std::sort(nontargets.begin(), nontargets.end());

  std::vector<double> thresholds;
  thresholds.reserve(targets.size() + nontargets.size());
  thresholds.insert(thresholds.end(), targets.begin(), targets.end());
  thresholds.insert(thresholds.end(), nontargets.begin(), nontargets.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  const double n_tar = static_cast<double>(targets.size());
  const double n_non = static_cast<double>(nontargets.size());
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<DetPoint> points;
  points.reserve(thresholds.size() + 2);
  points.push_back({-inf, 0.0, 1.0});
  for (double t : thresholds) {
    const auto miss = std::lower_bound(targets.begin(), targets.end(), t) -
                      targets.begin();
    const auto keep = std::lower_bound(nontargets.begin(), nontargets.end(),
                                       t) -
                      nontargets.begin();
    points.push_back({t, static_cast<double>(miss) / n_tar,
                      (n_non - static_cast<double>(keep)) / n_non});
  }
  points.push_back({inf, 1.0, 0.0});
  return points;
}

EerResult eer_with_threshold(const ScoreSet& scores) {
  const std::vector<DetPoint> points = det_points(scores);
  for (size_t i = 0; i < points.size(); ++i) {
    const double diff = points[i].p_miss - points[i].p_fa;
    if (diff < 0.0) continue;
    if (diff == 0.0) return {points[i].p_miss, points[i].threshold};
    // points[i-1] has diff < 0 (the sweep starts at p_miss=0, p_fa=1), so
    // the crossing lies strictly between i-1 and i.
    const DetPoint& lo = points[i - 1];
    const DetPoint& hi = points[i];
    const double d_lo = lo.p_miss - lo.p_fa;
    const double d_hi = diff;
    const double lambda = -d_lo / (d_hi - d_lo);
    const double value = lo.p_miss + lambda * (hi.p_miss - lo.p_miss);
    // The +inf sentinel's operating point is reached by any threshold just
    // above the largest score; keep the reported threshold finite.
    const double threshold =
        std::isfinite(hi.threshold)
            ? hi.threshold
            : std::nextafter(lo.threshold,
                             std::numeric_limits<double>::infinity());
    return {value, threshold};
  }
  // Unreachable: the sweep ends at p_miss=1, p_fa=0.
  return {1.0, points.back().threshold};
}

double eer(const ScoreSet& scores) { return eer_with_threshold(scores).eer; }

double min_dcf(const ScoreSet& scores, const DcfParams& params) {
  require(params.p_target > 0.0 && params.p_target < 1.0,
          "p_target must lie in (0,1)");
  require(params.c_miss > 0.0 && params.c_fa > 0.0, "costs must be positive");
  const std::vector<DetPoint> points = det_points(scores);
  const double w_miss = params.p_target * params.c_miss;
  const double w_fa = (1.0 - params.p_target) * params.c_fa;
  double best = std::numeric_limits<double>::infinity();
  for (const DetPoint& p : points) {
    best = std::min(best, w_miss * p.p_miss + w_fa * p.p_fa);
  }
  return best / std::min(w_miss, w_fa);
}

double cllr_metric(const ScoreSet& scores) {
  return losses::cllr_from_scores(scores);
}

std::vector<bool> decisions_at(const std::vector<TrialScore>& trials,
                               double threshold) {
  require(std::isfinite(threshold), "threshold must be finite");
  std::vector<bool> correct;
  correct.reserve(trials.size());
  for (const TrialScore& t : trials) {
    require(std::isfinite(t.score), "trial score must be finite");
    const bool accepted = t.score >= threshold;
    correct.push_back(accepted == t.is_target);
  }
  return correct;
}

McNemarResult mcnemar(const std::vector<bool>& correct_a,
                      const std::vector<bool>& correct_b, McNemarMode mode) {
  require(correct_a.size() == correct_b.size(),
          "decision vectors must have equal length");
  McNemarResult r;
  for (size_t i = 0; i < correct_a.size(); ++i) {
    if (!correct_a[i] && correct_b[i]) ++r.n01;
    if (correct_a[i] && !correct_b[i]) ++r.n10;
  }
  const std::int64_t n = r.n01 + r.n10;
  if (n == 0) {
    r.method = McNemarMethod::kExactBinomial;
    r.statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }

  const bool exact = mode == McNemarMode::kForceExact ||
                     (mode == McNemarMode::kAuto && n < 25);
  if (exact) {
    r.method = McNemarMethod::kExactBinomial;
    const std::int64_t k = std::min(r.n01, r.n10);
    r.statistic = static_cast<double>(k);
    r.p_value = std::min(1.0, 2.0 * binomial_half_cdf(n, k));
  } else {
    r.method = McNemarMethod::kChiSquareCorrected;
    const double d = std::abs(static_cast<double>(r.n01 - r.n10));
    r.statistic = (d - 1.0) * (d - 1.0) / static_cast<double>(n);
    r.p_value = chi_square_1df_sf(r.statistic);
  }
  return r;
}

MetricsReport evaluate(const std::vector<TrialScore>& trials,
                       const DcfParams& params) {
  ScoreSet scores;
  for (const TrialScore& t : trials) {
    (t.is_target ? scores.target_scores : scores.nontarget_scores)
        .push_back(t.score);
  }
  check_scores(scores);

  MetricsReport report;
  const EerResult e = eer_with_threshold(scores);
  report.eer = e.eer;
  report.eer_threshold = e.threshold;
  report.min_dcf = min_dcf(scores, params);
  report.cllr = cllr_metric(scores);
  report.n_target = static_cast<std::int64_t>(scores.target_scores.size());
  report.n_nontarget =
      static_cast<std::int64_t>(scores.nontarget_scores.size());
  report.decisions = decisions_at(trials, e.threshold);
  return report;
}

}  // namespace cllrce::metrics
