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

#include <cstdint>
#include <span>
#include <vector>

namespace survcl::synth {

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Seeded k-fold partition stratified by censoring status: censored and
/// uncensored cases are shuffled separately and dealt round-robin, so every
/// fold's censoring rate tracks the global one.
std::vector<Fold> split_folds(std::span<const int> censor, std::size_t n_folds,
                              std::uint64_t seed);

}  // namespace survcl::synth
