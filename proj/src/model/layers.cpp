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

#include "survcl/model/layers.hpp"

#include <cmath>
#include <vector>

namespace survcl::model {

Rng derive_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint32_t> words;
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  for (auto t : tags) {
    words.push_back(static_cast<std::uint32_t>(t));
    words.push_back(static_cast<std::uint32_t>(t >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

Linear Linear::init(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  ad::Matrix w(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  ad::Matrix b(1, static_cast<Eigen::Index>(out));
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = dist(rng);
  Linear layer;
  layer.weight = ad::Tensor::matrix(in, out, std::span<const double>(w.data(), w.size()), true);
  layer.bias = ad::Tensor::vector(std::span<const double>(b.data(), b.size()), true);
  return layer;
}

Linear Linear::zeros(std::size_t in, std::size_t out) {
  Linear layer;
  layer.weight = ad::Tensor::zeros({in, out}, true);
  layer.bias = ad::Tensor::zeros({out}, true);
  return layer;
}

FeedForward FeedForward::init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
  FeedForward ff;
  ff.first = Linear::init(in, hidden, rng);
  ff.second = Linear::init(hidden, out, rng);
  return ff;
}

GatedAttention GatedAttention::init(std::size_t in, std::size_t hidden, Rng& rng) {
  GatedAttention att;
  att.tanh_branch = Linear::init(in, hidden, rng);
  att.gate_branch = Linear::init(in, hidden, rng);
  const Linear score = Linear::init(hidden, 1, rng);
  att.score_weight = ad::Tensor::vector(score.weight.to_vector(), true);
  return att;
}

ad::Tensor GatedAttention::scores(const ad::Tensor& z) const {
  const ad::Tensor gated = ad::tanh(tanh_branch(z)) * ad::sigmoid(gate_branch(z));
  return ad::matmul(gated, score_weight);
}

}  // namespace survcl::model
