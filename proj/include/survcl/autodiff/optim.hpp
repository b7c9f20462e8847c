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

#include <vector>

namespace survcl::ad {

struct AdamWConfig {
  double learning_rate = 2e-4;
  double weight_decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with decoupled weight decay. Only entries marked trainable at step
/// time are updated; moment buffers are keyed by parameter position, so the
/// parameter set must not be reordered between steps.
class AdamW {
 public:
  explicit AdamW(AdamWConfig config) : config_(config) {}

  void step(ParameterSet& params);
  std::size_t steps_taken() const { return t_; }
  const AdamWConfig& config() const { return config_; }

 private:
  AdamWConfig config_;
  std::size_t t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace survcl::ad
