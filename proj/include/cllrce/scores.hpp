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

namespace cllrce {

/// Verification scores split into target and non-target trials. Higher
/// scores mean "more likely same speaker". Shared between the training-side
/// minibatch partition and the evaluation-side metrics.
struct ScoreSet {
  std::vector<double> target_scores;
  std::vector<double> nontarget_scores;
};

}  // namespace cllrce
