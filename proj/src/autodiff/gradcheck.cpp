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

#include "survcl/autodiff/gradcheck.hpp"

#include "survcl/error.hpp"

#include <algorithm>
#include <cmath>

namespace survcl::ad {

GradCheckReport finite_diff_report(ParameterSet& params, const std::function<Tensor()>& loss_fn,
                                   double eps) {
  if (!(eps > 0.0)) throw ContractError("finite_diff_check: eps must be positive");
  const Tensor loss = loss_fn();
  const GradientMap analytic = backward(loss, params);

  GradCheckReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& entry = params.entries()[p];
    Matrix& values = entry.tensor.mutable_value();
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      const double saved = values.data()[i];
      values.data()[i] = saved + eps;
      const double up = loss_fn().item();
      values.data()[i] = saved - eps;
      const double down = loss_fn().item();
      values.data()[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[p].grad.data()[i];
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a));
      ++report.checked;
      if (err > report.max_error) {
        report.max_error = err;
        report.worst_parameter = entry.name;
        report.worst_index = static_cast<std::size_t>(i);
      }
    }
  }
  params.zero_grad();
  return report;
}

double finite_diff_check(ParameterSet& params, const std::function<Tensor()>& loss_fn,
                         double eps) {
  return finite_diff_report(params, loss_fn, eps).max_error;
}

}  // namespace survcl::ad
