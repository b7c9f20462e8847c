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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace survcl::harness {

enum class Metric { kCIndex, kCIndexIpcw };

const char* metric_name(Metric m);

/// (K + 1) x K matrix of evaluation scores. Row 0 holds the untrained model,
/// row l the model after training task l. Column j is task j + 1.
class PerformanceMatrix {
 public:
  PerformanceMatrix() = default;
  PerformanceMatrix(std::size_t n_tasks, Metric metric);

  std::size_t n_tasks() const { return n_tasks_; }
  std::size_t rows() const { return n_tasks_ + 1; }
  Metric metric() const { return metric_; }

  /// Stores a score in [0, 1].
  void set(std::size_t row, std::size_t col, double value);
  std::optional<double> get(std::size_t row, std::size_t col) const;
  bool has(std::size_t row, std::size_t col) const { return get(row, col).has_value(); }
  /// Throws UndefinedMetricError for a missing entry.
  double at(std::size_t row, std::size_t col) const;
  bool row_complete(std::size_t row) const;
  std::size_t filled_rows() const;

 private:
  std::size_t index(std::size_t row, std::size_t col) const;

  std::size_t n_tasks_ = 0;
  Metric metric_ = Metric::kCIndex;
  std::vector<std::optional<double>> values_;
};

/// Mean of the final row.
double average_performance(const PerformanceMatrix& r);
/// Mean of row l over the tasks trained so far (columns 1..l).
double average_on_trained(const PerformanceMatrix& r, std::size_t row);
/// Mean over tasks 1..K-1 of the drop from their best score after training
/// to the final score. The final row is part of the maximum, so the drop is
/// never negative.
double forgetting(const PerformanceMatrix& r);
/// Mean over tasks 1..K-1 of R[K][j] - R[j][j].
double bwt(const PerformanceMatrix& r);
/// Mean over tasks 2..K of R[j-1][j] - R[0][j].
double fwt(const PerformanceMatrix& r);

/// The four headline metrics; a metric that cannot be computed for this
/// matrix (K = 1, or the joint method's missing rows) is left empty.
struct SummaryMetrics {
  std::optional<double> average;
  std::optional<double> forget;
  std::optional<double> bwt;
  std::optional<double> fwt;
};

SummaryMetrics summarize(const PerformanceMatrix& r);

}  // namespace survcl::harness
