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
#include <vector>

#include "cllrce/scores.hpp"

namespace cllrce::metrics {

/// Detection cost parameters. Defaults follow the NIST SRE convention for
/// minDCF with a 0.01 target prior and unit costs.
struct DcfParams {
  double p_target = 0.01;
  double c_miss = 1.0;
  double c_fa = 1.0;
};

/// One operating point of the detection-error sweep. p_miss is the fraction
/// of target scores strictly below the threshold; p_fa the fraction of
/// non-target scores at or above it.
struct DetPoint {
  double threshold;
  double p_miss;
  double p_fa;
};

struct EerResult {
  double eer;
  double threshold;
};

/// One verification trial's score together with its ground-truth label.
struct TrialScore {
  double score;
  bool is_target;
};

struct MetricsReport {
  double eer = 0.0;
  double min_dcf = 0.0;
  double cllr = 0.0;
  double eer_threshold = 0.0;
  std::int64_t n_target = 0;
  std::int64_t n_nontarget = 0;
  std::vector<bool> decisions;  // per-trial correctness at eer_threshold
};

enum class McNemarMethod { kExactBinomial, kChiSquareCorrected };

/// Method selection: automatic (exact below 25 discordant pairs, corrected
/// chi-square otherwise) or forced to one branch.
enum class McNemarMode { kAuto, kForceExact, kForceChiSquare };

struct McNemarResult {
  std::int64_t n01 = 0;  // a wrong, b right
  std::int64_t n10 = 0;  // a right, b wrong
  double statistic = 0.0;
  double p_value = 1.0;
  McNemarMethod method = McNemarMethod::kExactBinomial;
};

/// Threshold sweep over every distinct score value plus -inf/+inf
/// sentinels, ordered by threshold. p_miss is nondecreasing and p_fa
/// nonincreasing along the sweep.
std::vector<DetPoint> det_points(const ScoreSet& scores);

/// Equal error rate: the crossing of p_miss and p_fa along the sweep,
/// linearly interpolated between the adjacent points that bracket the sign
/// change of (p_miss - p_fa). An exact crossing point is returned directly.
/// The reported threshold is the crossing threshold when exact, otherwise
/// the upper bracketing threshold (the first sweep point with
/// p_miss >= p_fa).
EerResult eer_with_threshold(const ScoreSet& scores);
double eer(const ScoreSet& scores);

/// Minimum normalized detection cost over the sweep:
///   min_t (p_target*c_miss*p_miss + (1-p_target)*c_fa*p_fa)
/// divided by min(p_target*c_miss, (1-p_target)*c_fa). Always <= 1.
double min_dcf(const ScoreSet& scores, const DcfParams& params = {});

/// Cllr applied as an evaluation measure; same computation as the loss-side
/// closed form.
double cllr_metric(const ScoreSet& scores);

/// Per-trial correctness at a threshold. A trial is correct iff
/// (score >= threshold and target) or (score < threshold and non-target).
/// Output order matches input order.
std::vector<bool> decisions_at(const std::vector<TrialScore>& trials,
                               double threshold);

/// McNemar's paired significance test over two systems' per-trial
/// correctness on the same trials. Exact two-sided binomial below 25
/// discordant pairs, corrected chi-square (|n01-n10|-1)^2/(n01+n10) with a
/// 1-dof chi-square p-value otherwise. Zero discordant pairs gives p = 1.
McNemarResult mcnemar(const std::vector<bool>& correct_a,
                      const std::vector<bool>& correct_b,
                      McNemarMode mode = McNemarMode::kAuto);

/// Full evaluation of a scored trial list: EER, normalized minDCF, Cllr,
/// counts, and per-trial decisions at the EER threshold.
MetricsReport evaluate(const std::vector<TrialScore>& trials,
                       const DcfParams& params = {});

}  // namespace cllrce::metrics
