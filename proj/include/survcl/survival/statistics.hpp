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

#pragma once

#include <span>
#include <vector>

namespace survcl::survival {

/// Harrell's concordance index. A pair (i, j) is comparable when
/// t_i < t_j and case i is uncensored; it scores 1 when risk_i > risk_j and
/// 0.5 on a risk tie. Throws UndefinedMetricError without comparable pairs.
double c_index(std::span<const double> risks, std::span<const double> times,
               std::span<const int> censor);

/// Uno's inverse-probability-of-censoring weighted concordance, truncated
/// at tau. Each comparable pair with t_i < tau is weighted by G(t_i-)^-2,
/// where G is the Kaplan-Meier estimate of the censoring distribution.
double c_index_ipcw(std::span<const double> risks, std::span<const double> times,
                    std::span<const int> censor, double tau);

/// Default truncation: the largest uncensored time.
double default_ipcw_tau(std::span<const double> times, std::span<const int> censor);

struct SurvivalStep {
  double time = 0.0;
  double survival = 1.0;
  int at_risk = 0;
  int events = 0;
};

/// Product-limit estimate with one step per distinct event time.
/// events[i] == 1 means the event was observed at times[i]. At tied times all
/// events are processed before the censored cases leave the risk set.
std::vector<SurvivalStep> km_estimator(std::span<const double> times, std::span<const int> events);

/// Value of a step curve at t (right-continuous); 1 before the first step.
double km_value(const std::vector<SurvivalStep>& curve, double t);
/// Left limit of a step curve at t.
double km_left_limit(const std::vector<SurvivalStep>& curve, double t);

struct LogRankResult {
  double chi2 = 0.0;
  double p_value = 1.0;
  double observed_a = 0.0;
  double expected_a = 0.0;
  double variance = 0.0;
};

/// Two-group log-rank test with one degree of freedom.
LogRankResult log_rank_test(std::span<const double> times_a, std::span<const int> events_a,
                            std::span<const double> times_b, std::span<const int> events_b);

/// Upper tail of the chi-square distribution, via the regularised upper
/// incomplete gamma function Q(df / 2, x / 2).
double chi2_sf(double x, double df = 1.0);

/// Regularised upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

}  // namespace survcl::survival
