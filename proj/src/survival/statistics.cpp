// Copyright 2026 The survcl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "survcl/survival/statistics.hpp"

#include "survcl/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace survcl::survival {

namespace {

void check_aligned(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || b != c) throw ContractError("risks, times and censor differ in length");
}

std::vector<std::size_t> order_by_time(std::span<const double> times) {
  std::vector<std::size_t> idx(times.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  return idx;
}

// Weighted concordance over comparable pairs. weight(i) returns the pair
// weight for anchor i, or a negative value to skip the anchor.
template <typename Weight>
std::pair<double, double> weighted_concordance(std::span<const double> risks,
                                               std::span<const double> times,
                                               std::span<const int> censor, Weight weight) {
  const auto idx = order_by_time(times);
  const std::size_t n = idx.size();
  double concordant = 0.0;
  double comparable = 0.0;
  std::size_t block_end = 0;
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t i = idx[a];
    // Cases sharing t_i are not comparable with i; skip past the tie block.
    if (block_end <= a) {
      block_end = a + 1;
      while (block_end < n && times[idx[block_end]] == times[i]) ++block_end;
    }
    if (censor[i] != 0) continue;
    const double w = weight(i);
    if (w < 0.0) continue;
    for (std::size_t b = block_end; b < n; ++b) {
      const std::size_t j = idx[b];
      comparable += w;
      if (risks[i] > risks[j]) {
        concordant += w;
      } else if (risks[i] == risks[j]) {
        concordant += 0.5 * w;
      }
    }
  }
  return {concordant, comparable};
}

}  // namespace

double c_index(std::span<const double> risks, std::span<const double> times,
               std::span<const int> censor) {
  check_aligned(risks.size(), times.size(), censor.size());
  const auto [concordant, comparable] =
      weighted_concordance(risks, times, censor, [](std::size_t) { return 1.0; });
  if (comparable == 0.0) throw UndefinedMetricError("c-index: no comparable pairs");
  return concordant / comparable;
}

double default_ipcw_tau(std::span<const double> times, std::span<const int> censor) {
  double tau = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (censor[i] == 0) tau = std::max(tau, times[i]);
  }
  if (!std::isfinite(tau)) throw UndefinedMetricError("ipcw: no uncensored cases");
  return tau;
}

double c_index_ipcw(std::span<const double> risks, std::span<const double> times,
                    std::span<const int> censor, double tau) {
  check_aligned(risks.size(), times.size(), censor.size());
  const auto censoring_curve = km_estimator(times, censor);
  const auto [concordant, comparable] =
      weighted_concordance(risks, times, censor, [&](std::size_t i) {
        if (!(times[i] < tau)) return -1.0;
        const double g = km_left_limit(censoring_curve, times[i]);
        if (!(g > 0.0)) {
          throw UndefinedMetricError("ipcw: censoring survival is zero before t = " +
                                     std::to_string(times[i]));
        }
        return 1.0 / (g * g);
      });
  if (comparable == 0.0) throw UndefinedMetricError("ipcw c-index: no comparable pairs");
  return concordant / comparable;
}

std::vector<SurvivalStep> km_estimator(std::span<const double> times,
                                       std::span<const int> events) {
  if (times.size() != events.size()) throw ContractError("times and events differ in length");
  const auto idx = order_by_time(times);
  std::vector<SurvivalStep> curve;
  int at_risk = static_cast<int>(times.size());
  double s = 1.0;
  std::size_t a = 0;
  while (a < idx.size()) {
    const double t = times[idx[a]];
    int d = 0;
    int removed = 0;
    while (a < idx.size() && times[idx[a]] == t) {
      if (events[idx[a]] != 0) ++d;
      ++removed;
      ++a;
    }
    if (d > 0) {
      s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
      curve.push_back({t, s, at_risk, d});
    }
    at_risk -= removed;
  }
  return curve;
}

double km_value(const std::vector<SurvivalStep>& curve, double t) {
  double s = 1.0;
  for (const auto& step : curve) {
    if (step.time > t) break;
    s = step.survival;
  }
  return s;
}

double km_left_limit(const std::vector<SurvivalStep>& curve, double t) {
  double s = 1.0;
  for (const auto& step : curve) {
    if (step.time >= t) break;
    s = step.survival;
  }
  return s;
}

LogRankResult log_rank_test(std::span<const double> times_a, std::span<const int> events_a,
                            std::span<const double> times_b, std::span<const int> events_b) {
  if (times_a.size() != events_a.size() || times_b.size() != events_b.size()) {
    throw ContractError("log-rank: times and events differ in length");
  }
  if (times_a.empty() || times_b.empty()) throw UndefinedMetricError("log-rank: empty group");

  struct Obs {
    double t;
    int event;
    int group;
  };
  std::vector<Obs> obs;
  obs.reserve(times_a.size() + times_b.size());
  for (std::size_t i = 0; i < times_a.size(); ++i) obs.push_back({times_a[i], events_a[i], 0});
  for (std::size_t i = 0; i < times_b.size(); ++i) obs.push_back({times_b[i], events_b[i], 1});
  std::stable_sort(obs.begin(), obs.end(), [](const Obs& x, const Obs& y) { return x.t < y.t; });

  double n_a = static_cast<double>(times_a.size());
  double n_b = static_cast<double>(times_b.size());
  LogRankResult res;
  std::size_t k = 0;
  while (k < obs.size()) {
    const double t = obs[k].t;
    double d_a = 0.0, d_b = 0.0, out_a = 0.0, out_b = 0.0;
    while (k < obs.size() && obs[k].t == t) {
      const bool in_a = obs[k].group == 0;
      (in_a ? out_a : out_b) += 1.0;
      if (obs[k].event != 0) (in_a ? d_a : d_b) += 1.0;
      ++k;
    }
    const double d = d_a + d_b;
    const double n = n_a + n_b;
    if (d > 0.0) {
      res.observed_a += d_a;
      res.expected_a += n_a * d / n;
      if (n > 1.0) res.variance += n_a * n_b * d * (n - d) / (n * n * (n - 1.0));
    }
    n_a -= out_a;
    n_b -= out_b;
  }
  if (!(res.variance > 0.0)) throw UndefinedMetricError("log-rank: zero variance");
  const double diff = res.observed_a - res.expected_a;
  res.chi2 = diff * diff / res.variance;
  res.p_value = chi2_sf(res.chi2, 1.0);
  return res;
}

double gamma_q(double a, double x) {
  if (!(a > 0.0)) throw DomainError("gamma_q: shape must be positive");
  if (x < 0.0) throw DomainError("gamma_q: x must be nonnegative");
  if (x == 0.0) return 1.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  constexpr int kMaxIter = 10000;
  constexpr double kTol = 1e-16;
  if (x < a + 1.0) {
    // Lower series P(a, x) = e^{-x} x^a / Gamma(a + 1) * sum x^n / ((a+1)...(a+n)).
    double term = 1.0 / a;
    double total = term;
    for (int n = 1; n < kMaxIter; ++n) {
      term *= x / (a + n);
      total += term;
      if (std::abs(term) < std::abs(total) * kTol) break;
    }
    return std::max(0.0, 1.0 - total * std::exp(log_prefix));
  }
  // Continued fraction for Q(a, x), modified Lentz.
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kTol) break;
  }
  return std::exp(log_prefix) * h;
}

double chi2_sf(double x, double df) {
  if (!(x >= 0.0)) throw DomainError("chi2_sf: statistic must be nonnegative");
  if (!(df > 0.0)) throw DomainError("chi2_sf: degrees of freedom must be positive");
  return gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace survcl::survival
