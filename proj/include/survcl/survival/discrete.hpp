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

#include "survcl/autodiff/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace survcl::survival {

/// Discretisation of the time axis into n_bins bins. boundaries holds the
/// n_bins - 1 interior left endpoints; the first bin extends down without
/// bound and the last one up without bound.
struct BinSpec {
  std::size_t n_bins = 0;
  std::vector<double> boundaries;

  friend bool operator==(const BinSpec&, const BinSpec&) = default;
};

struct SurvLossConfig {
  /// Weight that down-weights the censored term, in [0, 1].
  double alpha_s = 0.0;
};

inline constexpr double kHazardClamp = 1e-7;

/// Bin boundaries at the (100 i / n_bins)-th percentiles (linear
/// interpolation between order statistics) of the uncensored times.
/// censor[i] == 1 marks a censored case.
BinSpec compute_bins(std::span<const double> times, std::span<const int> censor,
                     std::size_t n_bins);

/// Bin index of t; a time equal to a boundary falls in the higher bin.
std::size_t assign_bin(double t, const BinSpec& spec);

/// S[r] = prod_{u <= r} (1 - h[u]).
std::vector<double> hazards_to_survival(std::span<const double> hazards);

/// Scalar risk: minus the sum of the survival curve. Larger means shorter
/// expected survival.
double risk_score(std::span<const double> hazards);

/// Censored discrete-time negative log-likelihood of one case.
double nll_survival_loss(std::span<const double> hazards, std::size_t label, int censor,
                         const SurvLossConfig& cfg);

/// Differentiable version of nll_survival_loss on a rank-1 hazard tensor.
ad::Tensor nll_survival_loss(const ad::Tensor& hazards, std::size_t label, int censor,
                             const SurvLossConfig& cfg);

}  // namespace survcl::survival
