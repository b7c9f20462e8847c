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

#include "survcl/synth/folds.hpp"

#include "survcl/error.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace survcl::synth {

std::vector<Fold> split_folds(std::span<const int> censor, std::size_t n_folds,
                              std::uint64_t seed) {
  const std::size_t n = censor.size();
  if (n_folds < 2) throw ConfigError("at least two folds are required");
  if (n < n_folds) {
    throw DataError("dataset of " + std::to_string(n) + " cases is too small for " +
                    std::to_string(n_folds) + " folds");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> events, censored;
  for (std::size_t i = 0; i < n; ++i) (censor[i] != 0 ? censored : events).push_back(i);
  std::shuffle(events.begin(), events.end(), rng);
  std::shuffle(censored.begin(), censored.end(), rng);

  std::vector<std::size_t> assignment(n);
  std::size_t next = 0;
  for (const auto* group : {&events, &censored}) {
    for (std::size_t i : *group) assignment[i] = next++ % n_folds;
  }

  std::vector<Fold> folds(n_folds);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < n_folds; ++f) {
      (assignment[i] == f ? folds[f].validation : folds[f].train).push_back(i);
    }
  }
  return folds;
}

}  // namespace survcl::synth
