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

#include "survcl/survival/discrete.hpp"

#include "survcl/autodiff/ops.hpp"
#include "survcl/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace survcl::survival {

namespace {

double percentile_linear(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void check_hazards(std::span<const double> hazards) {
  if (hazards.empty()) throw ContractError("hazard curve is empty");
  for (double h : hazards) {
    if (!(h >= 0.0 && h <= 1.0)) {
      throw ContractError("hazard " + std::to_string(h) + " outside [0, 1]");
    }
  }
}

void check_label(std::size_t label, std::size_t n_bins, int censor, double alpha_s) {
  if (label >= n_bins) {
    throw ContractError("label " + std::to_string(label) + " out of range for " +
                        std::to_string(n_bins) + " bins");
  }
  if (censor != 0 && censor != 1) throw ContractError("censor flag must be 0 or 1");
  if (!(alpha_s >= 0.0 && alpha_s <= 1.0)) throw ConfigError("alpha_s must lie in [0, 1]");
}

}  // namespace

BinSpec compute_bins(std::span<const double> times, std::span<const int> censor,
                     std::size_t n_bins) {
  if (times.size() != censor.size()) throw ContractError("times and censor differ in length");
  if (n_bins < 2) throw ConfigError("at least two bins are required");
  std::vector<double> events;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (censor[i] == 0) events.push_back(times[i]);
  }
  if (events.size() < n_bins) {
    throw DataError("insufficient events: " + std::to_string(events.size()) +
                    " uncensored cases for " + std::to_string(n_bins) + " bins");
  }
  std::sort(events.begin(), events.end());
  BinSpec spec;
  spec.n_bins = n_bins;
  for (std::size_t i = 1; i < n_bins; ++i) {
    spec.boundaries.push_back(
        percentile_linear(events, static_cast<double>(i) / static_cast<double>(n_bins)));
  }
  for (std::size_t i = 1; i < spec.boundaries.size(); ++i) {
    if (!(spec.boundaries[i] > spec.boundaries[i - 1])) {
      throw DataError("bin boundaries are not strictly increasing (too few distinct event times)");
    }
  }
  if (n_bins == 2 && events.front() == events.back()) {
    throw DataError("bin boundaries are degenerate: all event times are equal");
  }
  return spec;
}

std::size_t assign_bin(double t, const BinSpec& spec) {
  // First boundary strictly greater than t; its index is the bin.
  const auto it = std::upper_bound(spec.boundaries.begin(), spec.boundaries.end(), t);
  return static_cast<std::size_t>(it - spec.boundaries.begin());
}

std::vector<double> hazards_to_survival(std::span<const double> hazards) {
  check_hazards(hazards);
  std::vector<double> s(hazards.size());
  double running = 1.0;
  for (std::size_t r = 0; r < hazards.size(); ++r) {
    running *= 1.0 - hazards[r];
    s[r] = running;
  }
  return s;
}

double risk_score(std::span<const double> hazards) {
  const auto s = hazards_to_survival(hazards);
  double total = 0.0;
  for (double v : s) total += v;
  return -total;
}

double nll_survival_loss(std::span<const double> hazards, std::size_t label, int censor,
                         const SurvLossConfig& cfg) {
  check_hazards(hazards);
  check_label(label, hazards.size(), censor, cfg.alpha_s);
  auto clamped = [](double h) { return std::clamp(h, kHazardClamp, 1.0 - kHazardClamp); };
  // log S(t_{label-1}); S(t_{-1}) = 1.
  double log_s_prev = 0.0;
  for (std::size_t u = 0; u < label; ++u) log_s_prev += std::log(1.0 - clamped(hazards[u]));
  if (censor == 0) return -(log_s_prev + std::log(clamped(hazards[label])));
  const double log_s = log_s_prev + std::log(1.0 - clamped(hazards[label]));
  return -(1.0 - cfg.alpha_s) * log_s;
}

ad::Tensor nll_survival_loss(const ad::Tensor& hazards, std::size_t label, int censor,
                             const SurvLossConfig& cfg) {
  if (hazards.rank() != 1) throw DimensionError("hazards must be rank 1");
  check_label(label, hazards.size(), censor, cfg.alpha_s);
  const ad::Tensor h = ad::clamp(hazards, kHazardClamp, 1.0 - kHazardClamp);
  const ad::Tensor log_surv_step = ad::log(ad::add_scalar(ad::scale(h, -1.0), 1.0));
  if (censor == 0) {
    ad::Tensor nll = ad::scale(ad::log(ad::element(h, label)), -1.0);
    if (label > 0) nll = nll - ad::sum(ad::slice(log_surv_step, 0, label));
    return nll;
  }
  const ad::Tensor log_s = ad::sum(ad::slice(log_surv_step, 0, label + 1));
  return ad::scale(log_s, -(1.0 - cfg.alpha_s));
}

}  // namespace survcl::survival
