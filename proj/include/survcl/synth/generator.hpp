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

#include "survcl/data.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace survcl::synth {

struct GeneratorConfig {
  std::size_t n_tasks = 4;
  std::size_t cases_per_task = 300;
  std::size_t min_patches = 8;
  std::size_t max_patches = 32;
  std::size_t patch_dim = 16;
  std::array<std::size_t, kGenomicGroups> genomic_dims = {8, 10, 12, 10, 8, 12};
  /// Width of each modality's latent vector.
  std::size_t latent_dim = 3;
  /// Fraction of patches in a bag that carry the latent signal.
  double signal_fraction = 0.3;
  /// Offset along a marker direction that distinguishes signal patches.
  double signal_marker = 2.0;
  double feature_noise = 0.5;
  double shared_scale = 2.0;
  double specific_scale = 1.0;
  /// Weight of the product of the two modality latents in the log-risk.
  double cross_strength = 1.0;
  /// Strength of the per-task rotation of every feature space (0 = none).
  double task_shift = 0.5;
  /// Target fraction of censored cases, in [0, 1).
  double censor_rate = 0.3;
  double baseline_hazard = 0.05;
  /// Spread of the per-task baseline hazard on the log scale.
  double baseline_spread = 0.7;
  std::size_t n_bins = 4;
  std::uint64_t seed = 0;
};

/// Generating quantities of one case, kept for oracle checks.
struct CaseOracle {
  double log_risk = 0.0;
  /// Terms that depend on the patch latent only.
  double patch_only = 0.0;
  /// Terms that depend on the genomic latent only.
  double genomic_only = 0.0;
  double cross = 0.0;
};

struct SyntheticStream {
  TaskStream stream;
  std::vector<std::vector<CaseOracle>> oracle;  // [task][case]
};

/// Seeded multimodal survival stream: shared plus task-specific linear risk
/// in two latent vectors, a cross-modal product term, per-task rotations of
/// the observed feature spaces, exponential event and censoring times.
/// Feature values are rounded to single precision so the stream serialises
/// losslessly.
SyntheticStream generate_stream(const GeneratorConfig& cfg);

void validate(const GeneratorConfig& cfg);

}  // namespace survcl::synth
