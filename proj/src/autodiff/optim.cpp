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

#include "survcl/autodiff/optim.hpp"

#include <cmath>

namespace survcl::ad {

void AdamW::step(ParameterSet& params) {
  auto& entries = params.entries();
  if (m_.size() < entries.size()) {
    m_.resize(entries.size());
    v_.resize(entries.size());
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t p = 0; p < entries.size(); ++p) {
    auto& entry = entries[p];
    if (!entry.trainable) continue;
    Matrix& w = entry.tensor.mutable_value();
    const Matrix g = entry.tensor.grad();
    if (m_[p].size() == 0) {
      m_[p] = Matrix::Zero(w.rows(), w.cols());
      v_[p] = Matrix::Zero(w.rows(), w.cols());
    }
    Matrix& m = m_[p];
    Matrix& v = v_[p];
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double gi = g.data()[i];
      double& mi = m.data()[i];
      double& vi = v.data()[i];
      mi = config_.beta1 * mi + (1.0 - config_.beta1) * gi;
      vi = config_.beta2 * vi + (1.0 - config_.beta2) * gi * gi;
      const double mhat = mi / bc1;
      const double vhat = vi / bc2;
      double& wi = w.data()[i];
      wi -= config_.learning_rate * (mhat / (std::sqrt(vhat) + config_.eps) +
                                     config_.weight_decay * wi);
    }
  }
}

}  // namespace survcl::ad
