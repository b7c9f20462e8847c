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

#include "survcl/autodiff/ops.hpp"
#include "survcl/autodiff/tensor.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace survcl::model {

using Rng = std::mt19937_64;

/// Generator seeded from a base seed plus a list of stream tags, so that
/// independently created components draw from unrelated streams.
Rng derive_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

struct Linear {
  ad::Tensor weight;  // in x out
  ad::Tensor bias;    // out

  /// Uniform(-1/sqrt(in), 1/sqrt(in)) for weights and bias.
  static Linear init(std::size_t in, std::size_t out, Rng& rng);
  static Linear zeros(std::size_t in, std::size_t out);

  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }
  ad::Tensor operator()(const ad::Tensor& x) const { return ad::linear(x, weight, bias); }

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + ".weight", weight);
    f(prefix + ".bias", bias);
  }
};

/// Linear - ReLU - Linear.
struct FeedForward {
  Linear first;
  Linear second;

  static FeedForward init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng);

  ad::Tensor operator()(const ad::Tensor& x) const { return second(ad::relu(first(x))); }

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    first.visit(prefix + ".0", f);
    second.visit(prefix + ".1", f);
  }
};

/// Gated attention scores for multiple-instance pooling:
/// score_i = w . (tanh(V z_i) * sigmoid(U z_i)). A score bias would cancel in
/// the softmax, so there is none.
struct GatedAttention {
  Linear tanh_branch;
  Linear gate_branch;
  ad::Tensor score_weight;  // hidden

  static GatedAttention init(std::size_t in, std::size_t hidden, Rng& rng);

  /// Unnormalised scores for the rows of z, as a rank-1 tensor.
  ad::Tensor scores(const ad::Tensor& z) const;

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    tanh_branch.visit(prefix + ".tanh", f);
    gate_branch.visit(prefix + ".gate", f);
    f(prefix + ".score.weight", score_weight);
  }
};

}  // namespace survcl::model
