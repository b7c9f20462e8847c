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

#include <functional>
#include <string>

namespace survcl::ad {

struct GradCheckReport {
  double max_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

/// Compares reverse-mode gradients against central differences for every
/// scalar of every parameter. The error of one coordinate is
/// |analytic - numeric| / max(1, |analytic|). loss_fn must rebuild the graph
/// from the current parameter values on every call.
GradCheckReport finite_diff_report(ParameterSet& params, const std::function<Tensor()>& loss_fn,
                                   double eps);

/// Maximum error of finite_diff_report.
double finite_diff_check(ParameterSet& params, const std::function<Tensor()>& loss_fn,
                         double eps);

}  // namespace survcl::ad
