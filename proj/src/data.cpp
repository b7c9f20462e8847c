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

#include "survcl/data.hpp"

#include "survcl/error.hpp"

#include <algorithm>
#include <cmath>

namespace survcl {

std::vector<double> TaskDataset::times() const {
  std::vector<double> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(c.time);
  return out;
}

std::vector<int> TaskDataset::censor() const {
  std::vector<int> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(c.censor);
  return out;
}

std::size_t TaskStream::patch_dim() const {
  for (const auto& t : tasks) {
    if (!t.cases.empty()) return t.cases.front().patches.dim();
  }
  throw DataError("stream has no cases");
}

std::size_t TaskStream::genomic_width() const {
  for (const auto& t : tasks) {
    if (!t.cases.empty()) return t.cases.front().genomics.width();
  }
  throw DataError("stream has no cases");
}

void assign_labels(TaskDataset& task, std::size_t n_bins) {
  const auto times = task.times();
  const auto censor = task.censor();
  task.bins = survival::compute_bins(times, censor, n_bins);
  for (auto& c : task.cases) c.label = survival::assign_bin(c.time, task.bins);
}

void pad_genomics(TaskStream& stream) {
  std::size_t width = 0;
  for (const auto& t : stream.tasks) {
    for (auto d : t.genomic_dims) width = std::max(width, d);
    for (const auto& c : t.cases) width = std::max(width, c.genomics.width());
  }
  for (auto& t : stream.tasks) {
    for (auto& c : t.cases) {
      const auto old = static_cast<Eigen::Index>(c.genomics.width());
      if (old == static_cast<Eigen::Index>(width)) continue;
      ad::Matrix padded = ad::Matrix::Zero(c.genomics.groups.rows(), static_cast<Eigen::Index>(width));
      padded.leftCols(old) = c.genomics.groups;
      c.genomics.groups = std::move(padded);
    }
  }
}

void validate_case(const CaseRecord& c) {
  if (c.patches.size() == 0) throw DataError("case '" + c.id + "' has an empty patch bag");
  if (static_cast<std::size_t>(c.genomics.groups.rows()) != kGenomicGroups) {
    throw DataError("case '" + c.id + "' must have exactly 6 genomic groups");
  }
  if (!c.patches.features.allFinite() || !c.genomics.groups.allFinite()) {
    throw DataError("case '" + c.id + "' has non-finite features");
  }
  if (!(c.time >= 0.0) || !std::isfinite(c.time)) {
    throw DataError("case '" + c.id + "' has an invalid survival time");
  }
  if (c.censor != 0 && c.censor != 1) throw DataError("case '" + c.id + "' has a bad censor flag");
}

}  // namespace survcl
