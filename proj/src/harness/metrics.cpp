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

#include "survcl/harness/metrics.hpp"

#include "survcl/error.hpp"

#include <algorithm>
#include <cmath>

namespace survcl::harness {

const char* metric_name(Metric m) {
  return m == Metric::kCIndex ? "c_index" : "c_index_ipcw";
}

PerformanceMatrix::PerformanceMatrix(std::size_t n_tasks, Metric metric)
    : n_tasks_(n_tasks), metric_(metric), values_((n_tasks + 1) * n_tasks) {
  if (n_tasks == 0) throw ContractError("performance matrix needs at least one task");
}

std::size_t PerformanceMatrix::index(std::size_t row, std::size_t col) const {
  if (row > n_tasks_ || col >= n_tasks_) {
    throw DimensionError("performance matrix entry (" + std::to_string(row) + ", " +
                         std::to_string(col) + ") out of range");
  }
  return row * n_tasks_ + col;
}

void PerformanceMatrix::set(std::size_t row, std::size_t col, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DomainError("performance score must lie in [0, 1]");
  }
  values_[index(row, col)] = value;
}

std::optional<double> PerformanceMatrix::get(std::size_t row, std::size_t col) const {
  return values_[index(row, col)];
}

double PerformanceMatrix::at(std::size_t row, std::size_t col) const {
  const auto v = get(row, col);
  if (!v) {
    throw UndefinedMetricError("performance matrix entry (" + std::to_string(row) + ", " +
                               std::to_string(col) + ") is not filled");
  }
  return *v;
}

bool PerformanceMatrix::row_complete(std::size_t row) const {
  for (std::size_t c = 0; c < n_tasks_; ++c) {
    if (!has(row, c)) return false;
  }
  return true;
}

std::size_t PerformanceMatrix::filled_rows() const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < n_tasks_; ++c) {
      if (has(r, c)) {
        ++n;
        break;
      }
    }
  }
  return n;
}

namespace {

void require_transfer_metric(const PerformanceMatrix& r, const char* name) {
  if (r.n_tasks() < 2) {
    throw UndefinedMetricError(std::string(name) + " needs at least two tasks");
  }
}

}  // namespace

double average_performance(const PerformanceMatrix& r) {
  return average_on_trained(r, r.n_tasks());
}

double average_on_trained(const PerformanceMatrix& r, std::size_t row) {
  if (row == 0 || row > r.n_tasks()) throw DimensionError("average needs a training row");
  double total = 0.0;
  for (std::size_t c = 0; c < row; ++c) total += r.at(row, c);
  return total / static_cast<double>(row);
}

double forgetting(const PerformanceMatrix& r) {
  require_transfer_metric(r, "forgetting");
  const std::size_t k = r.n_tasks();
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < k; ++c) {
    double best = r.at(c + 1, c);
    for (std::size_t l = c + 2; l <= k; ++l) best = std::max(best, r.at(l, c));
    total += best - r.at(k, c);
  }
  return total / static_cast<double>(k - 1);
}

double bwt(const PerformanceMatrix& r) {
  require_transfer_metric(r, "BWT");
  const std::size_t k = r.n_tasks();
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < k; ++c) total += r.at(k, c) - r.at(c + 1, c);
  return total / static_cast<double>(k - 1);
}

double fwt(const PerformanceMatrix& r) {
  require_transfer_metric(r, "FWT");
  const std::size_t k = r.n_tasks();
  double total = 0.0;
  for (std::size_t c = 1; c < k; ++c) total += r.at(c, c) - r.at(0, c);
  return total / static_cast<double>(k - 1);
}

SummaryMetrics summarize(const PerformanceMatrix& r) {
  auto attempt = [&](double (*f)(const PerformanceMatrix&)) -> std::optional<double> {
    try {
      return f(r);
    } catch (const UndefinedMetricError&) {
      return std::nullopt;
    }
  };
  SummaryMetrics s;
  s.average = average_performance(r);
  s.forget = attempt(forgetting);
  s.bwt = attempt(bwt);
  s.fwt = attempt(fwt);
  return s;
}

}  // namespace survcl::harness
