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

#include "cllrce/common.hpp"

namespace cllrce::synthdata {

/// Parameters of the synthetic multi-speaker, multi-style corpus. Speakers,
/// styles, and their interactions live in a latent space that a fixed
/// orthonormal mixing matrix maps into feature space; frame noise is added
/// in feature space.
struct CorpusSpec {
  int n_speakers = 50;
  int n_styles = 3;
  int utts_per_speaker_style = 4;
  int frames_min = 200;
  int frames_max = 300;
  int feature_dim = 24;
  int latent_dim = 8;
  double sigma_speaker = 1.0;
  double sigma_style = 0.6;
  double sigma_frame = 1.0;
  std::uint64_t seed = 1;
};

enum class Split { kTrain, kEnroll, kTest, kEnrollTest };

struct Utterance {
  Matrix features;  // frames x feature_dim
  int speaker_id = 0;
  int style_id = 0;
  int cell_index = 0;  // index within the (speaker, style) cell
  Split split = Split::kTrain;
};

/// Ground-truth latents of a generated corpus, exposed for statistical
/// oracle checks.
struct CorpusTruth {
  Matrix mixing;          // feature_dim x latent_dim, orthonormal columns
  Matrix speaker_means;   // n_speakers x latent_dim
  Matrix style_offsets;   // n_styles x latent_dim
  Matrix interactions;    // (n_speakers * n_styles) x latent_dim, s-major
};

void validate_spec(const CorpusSpec& spec);

/// Deterministic per-utterance frame count. Depends only on the utterance's
/// global index and the configured range, never on the corpus seed, so
/// reseeding changes the data but not any shape.
int frame_count(const CorpusSpec& spec, std::int64_t utterance_index);

/// Generates the corpus. Bit-identical output for identical specs. Frame f
/// of an utterance in cell (s, t) is
///   mixing * (speaker_mean_s + style_offset_t + interaction_st) + noise_f
/// with speaker_mean ~ N(0, sigma_speaker^2 I), style_offset ~
/// N(0, sigma_style^2 I), interaction ~ N(0, (sigma_style/2)^2 I) in latent
/// space and noise ~ N(0, sigma_frame^2 I) in feature space.
std::vector<Utterance> generate_corpus(const CorpusSpec& spec,
                                       CorpusTruth* truth = nullptr);

/// Assigns split labels per (speaker, style) cell: a seeded shuffle gives
/// round(enroll_fraction * n) utterances (at least 1, at most n-1) to
/// enroll, the same number (capped by what remains) to test, and the rest
/// to train. Single-utterance cells become EnrollTest when
/// allow_single_utterance_reuse is set and are an error otherwise.
void split_corpus(std::vector<Utterance>& corpus, double enroll_fraction,
                  std::uint64_t seed, bool allow_single_utterance_reuse);

}  // namespace cllrce::synthdata
