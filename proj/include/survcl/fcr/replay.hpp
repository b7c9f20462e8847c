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
#include "survcl/data.hpp"
#include "survcl/model/backbone.hpp"
#include "survcl/survival/discrete.hpp"

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace survcl::fcr {

using Rng = std::mt19937_64;

/// A stored case: its inputs, labels, and the representations the model
/// produced when the case entered the buffer. Features stay fixed after
/// insertion. Logits are kept for logit-matching replay (DER++).
struct ReplayItem {
  PatchBag patches;
  GenomicProfile genomics;
  model::FeatureTriple features;
  std::vector<double> logits;
  std::size_t label = 0;
  int censor = 0;
  int task = 0;
};

struct CLLossConfig {
  double alpha = 2.4e-3;  // feature-constraint (or logit-matching) weight
  double beta = 0.5;      // replay weight
  double zeta = 1.0;      // weight of the whole forgetting term for baselines
  std::size_t replay_count = 1;
};

/// Fixed-capacity reservoir over a stream of cases: after n items have been
/// offered, each of them is held with probability capacity / n.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  /// Offers one item to the reservoir. Returns true if it was stored.
  bool reservoir_update(ReplayItem item, Rng& rng);

  /// Reservoir decision alone: counts the offered item and returns the slot
  /// it should occupy, if any. Callers then fill the slot with store().
  std::optional<std::size_t> reserve_slot(Rng& rng);
  void store(std::size_t slot, ReplayItem item);

  /// r items drawn uniformly with replacement; empty when the buffer is.
  std::vector<const ReplayItem*> sample(std::size_t r, Rng& rng) const;

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::uint64_t seen_count() const { return seen_; }
  const std::vector<ReplayItem>& items() const { return items_; }

  void save(const std::string& path) const;
  static ReplayBuffer load(const std::string& path);

 private:
  std::size_t capacity_;
  std::uint64_t seen_ = 0;
  std::vector<ReplayItem> items_;
};

/// Replay-related loss terms over a batch of buffer items, computed from one
/// forward pass per item through the item's own task router and head.
struct ReplayTerms {
  ad::Tensor patch;    // L_P
  ad::Tensor genomic;  // L_G
  ad::Tensor fused;    // L_F
  ad::Tensor feature;  // L_FC = L_P + L_G + L_F
  ad::Tensor replay;   // L_R, mean survival NLL
  ad::Tensor logit;    // mean squared logit distance (DER++)
};

struct ReplayTermsRequest {
  bool features = true;
  bool replay = true;
  bool logits = false;
};

ReplayTerms replay_terms(const model::Backbone& net, std::span<const ReplayItem* const> items,
                         const survival::SurvLossConfig& surv, ReplayTermsRequest request = {});

ad::Tensor feature_constraint_loss(const model::Backbone& net,
                                   std::span<const ReplayItem* const> items);
ad::Tensor replay_loss(const model::Backbone& net, std::span<const ReplayItem* const> items,
                       const survival::SurvLossConfig& surv);

/// L = L_s + alpha L_FC + beta L_R.
ad::Tensor total_loss(const ad::Tensor& current, const ad::Tensor& feature,
                      const ad::Tensor& replay, const CLLossConfig& cfg);
double total_loss(double current, double feature, double replay, const CLLossConfig& cfg);

void validate(const CLLossConfig& cfg);

}  // namespace survcl::fcr
