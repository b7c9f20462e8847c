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
#include "survcl/model/layers.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace survcl::model {

enum class IntegrationMode {
  kReplace,  // y = MS(x); experts mirror the replaced feed-forward layer
  kAppend,   // y = x + MS(x)
};

struct MoEConfig {
  std::size_t n_experts = 8;
  std::size_t k_top = 2;
};

/// Outcome of shared-expert top-k selection. Indices are 0-based.
struct GatingResult {
  std::vector<std::size_t> selected;  // ascending
  std::vector<double> weights;        // length n_experts, zero off the support
};

/// Keeps shared_idx plus the k_top largest of the remaining logits (ties go
/// to the lower index); everything else is masked to -infinity before the
/// softmax.
std::vector<bool> topk_s_mask(std::span<const double> logits, std::size_t k_top,
                              std::size_t shared_idx);
GatingResult topk_s_select(std::span<const double> logits, std::size_t k_top,
                           std::size_t shared_idx);

/// Fixed pool of two-layer experts with one linear router per task.
class MoEModule {
 public:
  MoEModule() = default;
  MoEModule(std::size_t in_dim, std::size_t hidden, std::size_t out_dim, MoEConfig config,
            IntegrationMode mode, std::uint64_t seed);

  /// Creates the router of a new task. Its initial values depend only on the
  /// module seed and the task id.
  void add_task_router(int task);
  bool has_router(int task) const { return routers_.count(task) != 0; }
  void freeze_router(int task);
  bool router_frozen(int task) const;
  std::vector<int> tasks() const;

  /// Gating of x through the task's router, with the differentiable weights.
  ad::Tensor gate(const ad::Tensor& x, int task, GatingResult* trace = nullptr) const;
  /// Mixture output for the given gating (integration mode applied).
  ad::Tensor combine(const ad::Tensor& x, const ad::Tensor& weights,
                     std::span<const std::size_t> selected) const;
  ad::Tensor forward(const ad::Tensor& x, int task, GatingResult* trace = nullptr) const;

  /// Per-expert fraction of inputs on which the expert was selected.
  std::vector<double> routing_stats(std::span<const ad::Tensor> inputs, int task) const;

  std::size_t n_experts() const { return experts_.size(); }
  std::size_t k_top() const { return config_.k_top; }
  std::size_t shared_index() const { return experts_.size() - 1; }
  IntegrationMode mode() const { return mode_; }
  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }

  FeedForward& expert(std::size_t i) { return experts_.at(i); }
  const FeedForward& expert(std::size_t i) const { return experts_.at(i); }
  const Linear& router(int task) const;
  Linear& router(int task);

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    for (std::size_t i = 0; i < experts_.size(); ++i) {
      experts_[i].visit(prefix + ".expert" + std::to_string(i), f);
    }
    for (auto& [task, router] : routers_) {
      router.visit(prefix + ".router" + std::to_string(task), f);
    }
  }

 private:
  std::size_t in_dim_ = 0;
  std::size_t out_dim_ = 0;
  MoEConfig config_;
  IntegrationMode mode_ = IntegrationMode::kAppend;
  std::uint64_t seed_ = 0;
  std::vector<FeedForward> experts_;
  std::map<int, Linear> routers_;
  std::map<int, bool> frozen_;
};

}  // namespace survcl::model
