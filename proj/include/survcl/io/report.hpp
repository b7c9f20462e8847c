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

#include "survcl/harness/trainer.hpp"
#include "survcl/survival/statistics.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace survcl::io {

inline constexpr double kSignificanceLevel = 0.05;

/// Average, Forget, BWT and FWT for both concordance metrics, plus the
/// per-row average over trained tasks. Undefined metrics are omitted.
nlohmann::json metrics_json(const harness::SequenceResult& result, harness::Method method,
                            std::uint64_t seed);

/// Mean and sample standard deviation of every metric across runs of one
/// method; the deviation is omitted for a single run.
nlohmann::json aggregate_json(std::span<const nlohmann::json> runs);

void write_json(const nlohmann::json& j, const std::string& path);
void write_matrix_csv(const harness::PerformanceMatrix& r, const std::string& path);
void write_routing_csv(std::span<const harness::RoutingRecord> records, const std::string& path);
void write_curves_csv(std::span<const harness::EpochRecord> curve, const std::string& path);

/// Kaplan-Meier curves of the cases above (high) and at or below (low) the
/// mean risk, and the log-rank comparison of the two groups.
struct KmReport {
  std::vector<survival::SurvivalStep> low;
  std::vector<survival::SurvivalStep> high;
  survival::LogRankResult test;
  bool significant = false;
};

/// Throws DataError when either group is empty.
KmReport km_split(std::span<const double> risks, std::span<const double> times,
                  std::span<const int> censor);

/// One row per curve step: group, time, survival, at_risk, events, and the
/// log-rank chi2, p-value and significance flag repeated on every row.
void write_km_csv(const KmReport& report, const std::string& path);

/// Scores the selected cases of a task with the model and writes the split.
KmReport emit_km_csv(const model::Backbone& net, const TaskDataset& data,
                     std::span<const std::size_t> indices, const std::string& path);

}  // namespace survcl::io
