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

// Test-only oracles. Everything here is written independently of the
// library code paths it checks: naive counting instead of sorted sweeps,
// quadrature instead of closed forms, finite differences instead of
// analytic gradients.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cllrce/common.hpp"

namespace oracles {

using cllrce::Matrix;
using cllrce::Vector;

// Central finite differences of a scalar function over a matrix argument.
template <typename F>
Matrix fd_grad_matrix(F&& f, const Matrix& x, double step = 1e-5) {
  Matrix grad(x.rows(), x.cols());
  for (long r = 0; r < x.rows(); ++r) {
    for (long c = 0; c < x.cols(); ++c) {
      Matrix plus = x;
      Matrix minus = x;
      plus(r, c) += step;
      minus(r, c) -= step;
      grad(r, c) = (f(plus) - f(minus)) / (2.0 * step);
    }
  }
  return grad;
}

// Central finite differences over a flat vector argument.
template <typename F>
Vector fd_grad_vector(F&& f, const Vector& x, double step = 1e-5) {
  Vector grad(x.size());
  for (long i = 0; i < x.size(); ++i) {
    Vector plus = x;
    Vector minus = x;
    plus(i) += step;
    minus(i) -= step;
    grad(i) = (f(plus) - f(minus)) / (2.0 * step);
  }
  return grad;
}

struct SweepPoint {
  double threshold;
  double p_miss;
  double p_fa;
};

// Exhaustive threshold enumeration with direct counting loops.
inline std::vector<SweepPoint> brute_force_sweep(
    const std::vector<double>& targets, const std::vector<double>& nontargets) {
  std::vector<double> thresholds;
  thresholds.insert(thresholds.end(), targets.begin(), targets.end());
  thresholds.insert(thresholds.end(), nontargets.begin(), nontargets.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  thresholds.insert(thresholds.begin(),
                    -std::numeric_limits<double>::infinity());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  std::vector<SweepPoint> points;
  for (double t : thresholds) {
    long miss = 0;
    for (double s : targets) {
      if (s < t) ++miss;
    }
    long alarms = 0;
    for (double s : nontargets) {
      if (s >= t) ++alarms;
    }
    points.push_back({t, static_cast<double>(miss) / targets.size(),
                      static_cast<double>(alarms) / nontargets.size()});
  }
  return points;
}

inline double brute_force_eer(const std::vector<double>& targets,
                              const std::vector<double>& nontargets) {
  const auto points = brute_force_sweep(targets, nontargets);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double diff = points[i].p_miss - points[i].p_fa;
    if (diff < 0.0) continue;
    if (diff == 0.0) return points[i].p_miss;
    const double d_lo = points[i - 1].p_miss - points[i - 1].p_fa;
    const double lambda = -d_lo / (diff - d_lo);
    return points[i - 1].p_miss +
           lambda * (points[i].p_miss - points[i - 1].p_miss);
  }
  return 1.0;
}

inline double brute_force_min_dcf(const std::vector<double>& targets,
                                  const std::vector<double>& nontargets,
                                  double p_target, double c_miss,
                                  double c_fa) {
  const auto points = brute_force_sweep(targets, nontargets);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& point : points) {
    best = std::min(best, p_target * c_miss * point.p_miss +
                              (1.0 - p_target) * c_fa * point.p_fa);
  }
  return best / std::min(p_target * c_miss, (1.0 - p_target) * c_fa);
}

// Exact binomial tail via Pascal's triangle in 64-bit integers (n <= 60).
inline double exact_binomial_two_sided(std::int64_t n, std::int64_t k) {
  std::vector<std::uint64_t> row = {1};
  for (std::int64_t i = 1; i <= n; ++i) {
    std::vector<std::uint64_t> next(i + 1, 1);
    for (std::int64_t j = 1; j < i; ++j) {
      next[j] = row[j - 1] + row[j];
    }
    row = std::move(next);
  }
  long double tail = 0.0L;
  for (std::int64_t j = 0; j <= k; ++j) {
    tail += static_cast<long double>(row[static_cast<std::size_t>(j)]);
  }
  tail /= std::pow(2.0L, static_cast<long double>(n));
  const long double p = 2.0L * tail;
  return static_cast<double>(p > 1.0L ? 1.0L : p);
}

// Survival function of chi-square with one degree of freedom by Simpson
// integration of the density exp(-x/2)/sqrt(2 pi x).
inline double chi_square_1df_sf_quadrature(double s) {
  const auto pdf = [](double x) {
    return std::exp(-x / 2.0) / std::sqrt(2.0 * M_PI * x);
  };
  const double upper = s + 120.0;
  const int n = 400000;  // even
  const double h = (upper - s) / n;
  double sum = pdf(s + 1e-12) + pdf(upper);
  for (int i = 1; i < n; ++i) {
    sum += pdf(s + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

inline double gaussian_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / variance) /
         std::sqrt(2.0 * M_PI * variance);
}

// log integral N(e1; y, w) N(e2; y, w) N(y; mu, b) dy by Simpson's rule.
inline double quadrature_log_same(double e1, double e2, double mu, double b,
                                  double w) {
  const double center = (e1 + e2 + mu) / 3.0;
  const double radius = 12.0 * std::sqrt(b + w) + std::abs(e1 - e2);
  const int n = 200000;  // even
  const double lo = center - radius;
  const double h = 2.0 * radius / n;
  const auto f = [&](double y) {
    return gaussian_pdf(e1, y, w) * gaussian_pdf(e2, y, w) *
           gaussian_pdf(y, mu, b);
  };
  double sum = f(lo) + f(lo + 2.0 * radius);
  for (int i = 1; i < n; ++i) {
    sum += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return std::log(sum * h / 3.0);
}

// Hand-rolled Adam recurrence on a scalar parameter.
inline double adam_scalar_trajectory(double x0, double grad, int steps,
                                     double lr, double beta1, double beta2,
                                     double eps) {
  double x = x0;
  double m = 0.0;
  double v = 0.0;
  for (int t = 1; t <= steps; ++t) {
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad * grad;
    const double m_hat = m / (1.0 - std::pow(beta1, t));
    const double v_hat = v / (1.0 - std::pow(beta2, t));
    x -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
  return x;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng);
}

inline Matrix random_matrix(std::mt19937_64& rng, long rows, long cols,
                            double lo, double hi) {
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      m(r, c) = uniform(rng, lo, hi);
    }
  }
  return m;
}

// Relative agreement with an absolute floor for tiny entries, the usual
// gradient-check tolerance shape.
inline bool close_with_floor(double actual, double expected, double rel_tol,
                             double abs_floor) {
  const double diff = std::abs(actual - expected);
  if (diff <= abs_floor) return true;
  return diff <= rel_tol * std::max(std::abs(actual), std::abs(expected));
}

}  // namespace oracles
