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
#include "survcl/survival/discrete.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace survcl {

inline constexpr std::size_t kGenomicGroups = 6;

/// Bag of patch feature vectors of one slide, n_patches x patch_dim.
struct PatchBag {
  ad::Matrix features;

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
};

/// Six functional genomic groups, zero-padded to a common width. Row g holds
/// group g.
struct GenomicProfile {
  ad::Matrix groups;

  std::size_t width() const { return static_cast<std::size_t>(groups.cols()); }
};

/// One patient case.
struct CaseRecord {
  std::string id;
  int task = 0;
  double time = 0.0;
  int censor = 0;  // 1 = censored
  std::size_t label = 0;
  PatchBag patches;
  GenomicProfile genomics;
};

/// Cases of one task with the task's own time discretisation.
struct TaskDataset {
  std::string name;
  int task = 0;
  survival::BinSpec bins;
  /// Unpadded width of each genomic group as stored on disk.
  std::array<std::size_t, kGenomicGroups> genomic_dims{};
  std::vector<CaseRecord> cases;

  std::vector<double> times() const;
  std::vector<int> censor() const;
};

/// Ordered task sequence D_1 .. D_K.
struct TaskStream {
  std::vector<TaskDataset> tasks;

  std::size_t size() const { return tasks.size(); }
  std::size_t patch_dim() const;
  std::size_t genomic_width() const;
};

/// Recomputes every task's BinSpec from its uncensored times and relabels
/// the cases.
void assign_labels(TaskDataset& task, std::size_t n_bins);

/// Zero-pads every genomic profile in the stream to the widest group.
void pad_genomics(TaskStream& stream);

void validate_case(const CaseRecord& c);

}  // namespace survcl
