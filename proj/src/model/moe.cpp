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

#include "survcl/model/moe.hpp"

#include "survcl/autodiff/ops.hpp"
#include "survcl/error.hpp"

#include <algorithm>
#include <numeric>

namespace survcl::model {

namespace {

constexpr std::uint64_t kRouterTag = 0x726f75746572ULL;
constexpr std::uint64_t kExpertTag = 0x657870657274ULL;

}  // namespace

std::vector<bool> topk_s_mask(std::span<const double> logits, std::size_t k_top,
                              std::size_t shared_idx) {
  const std::size_t n = logits.size();
  if (shared_idx >= n) throw ConfigError("shared expert index out of range");
  if (k_top + 1 > n) {
    throw ConfigError("top-k selection needs k_top + 1 <= n_experts (k_top = " +
                      std::to_string(k_top) + ", n_experts = " + std::to_string(n) + ")");
  }
  std::vector<std::size_t> rest;
  rest.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i != shared_idx) rest.push_back(i);
  }
  std::stable_sort(rest.begin(), rest.end(),
                   [&](std::size_t a, std::size_t b) { return logits[a] > logits[b]; });
  std::vector<bool> keep(n, false);
  keep[shared_idx] = true;
  for (std::size_t i = 0; i < k_top; ++i) keep[rest[i]] = true;
  return keep;
}

GatingResult topk_s_select(std::span<const double> logits, std::size_t k_top,
                           std::size_t shared_idx) {
  const auto keep = topk_s_mask(logits, k_top, shared_idx);
  const auto weights = ad::softmax(ad::mask_fill(ad::Tensor::vector(logits), keep));
  GatingResult result;
  result.weights = weights.to_vector();
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) result.selected.push_back(i);
  }
  return result;
}

MoEModule::MoEModule(std::size_t in_dim, std::size_t hidden, std::size_t out_dim,
                     MoEConfig config, IntegrationMode mode, std::uint64_t seed)
    : in_dim_(in_dim), out_dim_(out_dim), config_(config), mode_(mode), seed_(seed) {
  if (config.n_experts < config.k_top + 1) {
    throw ConfigError("n_experts must be at least k_top + 1");
  }
  if (mode == IntegrationMode::kAppend && in_dim != out_dim) {
    throw ConfigError("append mode needs equal input and output widths");
  }
  auto rng = derive_rng(seed, {kExpertTag});
  experts_.reserve(config.n_experts);
  for (std::size_t i = 0; i < config.n_experts; ++i) {
    auto expert = FeedForward::init(in_dim, hidden, out_dim, rng);
    // Zero output layer: every expert maps to 0 and the residual branch starts
    // as the identity.
    if (mode == IntegrationMode::kAppend) expert.second = Linear::zeros(hidden, out_dim);
    experts_.push_back(std::move(expert));
  }
}

void MoEModule::add_task_router(int task) {
  if (has_router(task)) {
    throw ContractError("router for task " + std::to_string(task) + " already exists");
  }
  auto rng = derive_rng(seed_, {kRouterTag, static_cast<std::uint64_t>(task)});
  routers_.emplace(task, Linear::init(in_dim_, experts_.size(), rng));
  frozen_[task] = false;
}

void MoEModule::freeze_router(int task) {
  router(task);
  frozen_[task] = true;
}

bool MoEModule::router_frozen(int task) const {
  const auto it = frozen_.find(task);
  return it != frozen_.end() && it->second;
}

std::vector<int> MoEModule::tasks() const {
  std::vector<int> out;
  for (const auto& [task, _] : routers_) out.push_back(task);
  return out;
}

const Linear& MoEModule::router(int task) const {
  const auto it = routers_.find(task);
  if (it == routers_.end()) {
    throw UnknownTaskError("no router for task " + std::to_string(task));
  }
  return it->second;
}

Linear& MoEModule::router(int task) {
  const auto it = routers_.find(task);
  if (it == routers_.end()) {
    throw UnknownTaskError("no router for task " + std::to_string(task));
  }
  return it->second;
}

ad::Tensor MoEModule::gate(const ad::Tensor& x, int task, GatingResult* trace) const {
  const ad::Tensor logits = router(task)(x);
  const auto& lv = logits.value();
  const auto keep = topk_s_mask(std::span<const double>(lv.data(), lv.size()), config_.k_top,
                                shared_index());
  ad::Tensor weights = ad::softmax(ad::mask_fill(logits, keep));
  if (trace != nullptr) {
    trace->selected.clear();
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (keep[i]) trace->selected.push_back(i);
    }
    trace->weights = weights.to_vector();
  }
  return weights;
}

ad::Tensor MoEModule::combine(const ad::Tensor& x, const ad::Tensor& weights,
                              std::span<const std::size_t> selected) const {
  if (selected.empty()) throw ContractError("empty expert selection");
  ad::Tensor mixed;
  for (std::size_t i : selected) {
    ad::Tensor term = experts_.at(i)(x) * ad::element(weights, i);
    mixed = mixed.defined() ? mixed + term : term;
  }
  if (mode_ == IntegrationMode::kAppend) return x + mixed;
  return mixed;
}

ad::Tensor MoEModule::forward(const ad::Tensor& x, int task, GatingResult* trace) const {
  GatingResult local;
  GatingResult& g = trace != nullptr ? *trace : local;
  const ad::Tensor weights = gate(x, task, &g);
  return combine(x, weights, g.selected);
}

std::vector<double> MoEModule::routing_stats(std::span<const ad::Tensor> inputs, int task) const {
  if (inputs.empty()) throw ContractError("routing_stats needs at least one input");
  std::vector<double> counts(experts_.size(), 0.0);
  const Linear& r = router(task);
  for (const auto& x : inputs) {
    const ad::Tensor logits = r(x.detach());
    const auto& lv = logits.value();
    const auto keep = topk_s_mask(std::span<const double>(lv.data(), lv.size()), config_.k_top,
                                  shared_index());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (keep[i]) counts[i] += 1.0;
    }
  }
  for (auto& c : counts) c /= static_cast<double>(inputs.size());
  return counts;
}

}  // namespace survcl::model
