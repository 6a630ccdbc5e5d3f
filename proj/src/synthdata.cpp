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

#include "cllrce/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace cllrce::synthdata {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Matrix gaussian_matrix(long rows, long cols, double scale,
                       std::mt19937_64& rng,
                       std::normal_distribution<double>& gauss) {
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      m(r, c) = scale * gauss(rng);
    }
  }
  return m;
}

}  // namespace

void validate_spec(const CorpusSpec& spec) {
  require(spec.n_speakers >= 1, "n_speakers must be >= 1");
  require(spec.n_styles >= 1, "n_styles must be >= 1");
  require(spec.utts_per_speaker_style >= 1,
          "utts_per_speaker_style must be >= 1");
  require(spec.frames_min >= 1 && spec.frames_max >= spec.frames_min,
          "frame count range must satisfy 1 <= frames_min <= frames_max");
  require(spec.feature_dim >= 1 && spec.latent_dim >= 1,
          "feature_dim and latent_dim must be >= 1");
  require(spec.feature_dim >= spec.latent_dim,
          "feature_dim must be >= latent_dim");
  require(spec.sigma_speaker >= 0.0 && spec.sigma_style >= 0.0 &&
              spec.sigma_frame >= 0.0,
          "variance scales must be nonnegative");
}

int frame_count(const CorpusSpec& spec, std::int64_t utterance_index) {
  const std::uint64_t range =
      static_cast<std::uint64_t>(spec.frames_max - spec.frames_min) + 1;
  const std::uint64_t h =
      splitmix64(static_cast<std::uint64_t>(utterance_index) + 1);
  return spec.frames_min + static_cast<int>(h % range);
}

std::vector<Utterance> generate_corpus(const CorpusSpec& spec,
                                       CorpusTruth* truth) {
  validate_spec(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Matrix raw = gaussian_matrix(spec.feature_dim, spec.latent_dim, 1.0, rng,
                               gauss);
  Eigen::HouseholderQR<Matrix> qr(raw);
  const Matrix mixing =
      qr.householderQ() * Matrix::Identity(spec.feature_dim, spec.latent_dim);

  const Matrix speaker_means = gaussian_matrix(
      spec.n_speakers, spec.latent_dim, spec.sigma_speaker, rng, gauss);
  const Matrix style_offsets = gaussian_matrix(
      spec.n_styles, spec.latent_dim, spec.sigma_style, rng, gauss);
  const Matrix interactions =
      gaussian_matrix(static_cast<long>(spec.n_speakers) * spec.n_styles,
                      spec.latent_dim, spec.sigma_style / 2.0, rng, gauss);

  std::vector<Utterance> corpus;
  corpus.reserve(static_cast<size_t>(spec.n_speakers) * spec.n_styles *
                 spec.utts_per_speaker_style);
  std::int64_t utt_index = 0;
  for (int s = 0; s < spec.n_speakers; ++s) {
    for (int t = 0; t < spec.n_styles; ++t) {
      const Vector latent = speaker_means.row(s) + style_offsets.row(t) +
                            interactions.row(s * spec.n_styles + t);
      const Vector feature_mean = mixing * latent;
      for (int u = 0; u < spec.utts_per_speaker_style; ++u) {
        const int frames = frame_count(spec, utt_index++);
        Utterance utt;
        utt.speaker_id = s;
        utt.style_id = t;
        utt.cell_index = u;
        utt.features = Matrix(frames, spec.feature_dim);
        for (int f = 0; f < frames; ++f) {
          for (int d = 0; d < spec.feature_dim; ++d) {
            utt.features(f, d) = feature_mean(d) + spec.sigma_frame * gauss(rng);
          }
        }
        corpus.push_back(std::move(utt));
      }
    }
  }

  if (truth != nullptr) {
    truth->mixing = mixing;
    truth->speaker_means = speaker_means;
    truth->style_offsets = style_offsets;
    truth->interactions = interactions;
  }
  return corpus;
}

void split_corpus(std::vector<Utterance>& corpus, double enroll_fraction,
                  std::uint64_t seed, bool allow_single_utterance_reuse) {
  require(enroll_fraction > 0.0 && enroll_fraction < 1.0,
          "enroll_fraction must lie in (0,1)");

  std::map<std::pair<int, int>, std::vector<size_t>> cells;
  for (size_t i = 0; i < corpus.size(); ++i) {
    cells[{corpus[i].speaker_id, corpus[i].style_id}].push_back(i);
  }

  std::vector<std::pair<int, int>> infeasible;
  for (const auto& [cell, members] : cells) {
    if (members.size() == 1 && !allow_single_utterance_reuse) {
      infeasible.push_back(cell);
    }
  }
  if (!infeasible.empty()) {
    std::ostringstream msg;
    msg << "split infeasible without single-utterance reuse; offending "
           "(speaker, style) cells:";
    for (const auto& [s, t] : infeasible) msg << " (" << s << "," << t << ")";
    throw ContractError(msg.str());
  }

  std::mt19937_64 rng(seed);
  for (auto& [cell, members] : cells) {
    const long n = static_cast<long>(members.size());
    if (n == 1) {
      corpus[members[0]].split = Split::kEnrollTest;
      continue;
    }
    // Fisher-Yates over the cell's members.
    std::vector<size_t> order = members;
    for (long i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<long> pick(0, i);
      std::swap(order[static_cast<size_t>(i)],
                order[static_cast<size_t>(pick(rng))]);
    }
    const long n_enroll = std::clamp(
        static_cast<long>(std::llround(enroll_fraction * n)), 1L, n - 1);
    const long n_test = std::clamp(n_enroll, 1L, n - n_enroll);
    for (long i = 0; i < n; ++i) {
      Split split = Split::kTrain;
      if (i < n_enroll) {
        split = Split::kEnroll;
      } else if (i < n_enroll + n_test) {
        split = Split::kTest;
      }
      corpus[order[static_cast<size_t>(i)]].split = split;
    }
  }
}

}  // namespace cllrce::synthdata
