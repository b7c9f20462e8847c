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
#include "survcl/model/layers.hpp"
#include "survcl/model/moe.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace survcl::model {

struct BackboneConfig {
  std::size_t patch_dim = 16;
  std::size_t genomic_width = 12;
  std::size_t latent = 64;
  std::size_t hidden = 128;
  std::size_t attention_hidden = 32;
  std::size_t n_bins = 4;
  /// Adds the three MS-MoE stages; without them the fusion stage is a plain
  /// feed-forward network.
  bool ms_moe = true;
  MoEConfig moe;
  std::uint64_t seed = 0;
};

/// Representations after the patch encoder, the genomic encoder and fusion.
struct FeatureTriple {
  std::vector<double> patch;
  std::vector<double> genomic;
  std::vector<double> fused;

  friend bool operator==(const FeatureTriple&, const FeatureTriple&) = default;
};

enum class MoESite : std::size_t { kPatch = 0, kGenomic = 1, kFusion = 2 };
inline constexpr std::array<const char*, 3> kMoESiteNames = {"patch", "genomic", "fusion"};

struct ForwardPass {
  ad::Tensor f_patch;
  ad::Tensor f_genomic;
  ad::Tensor f_fused;
  ad::Tensor logits;
  ad::Tensor hazards;
  /// Inputs to the three MS-MoE stages and their gating (only with ms_moe).
  std::array<ad::Tensor, 3> moe_inputs;
  std::array<GatingResult, 3> gating;

  FeatureTriple features() const;
};

/// Attention-MIL multimodal survival network with a patch encoder, a
/// genomic encoder, a fusion stage and one hazard head per task. Each
/// encoder sees a summary of the other modality.
class Backbone {
 public:
  explicit Backbone(BackboneConfig config);

  const BackboneConfig& config() const { return config_; }

  /// Adds the task's head and routers; their initial values depend only on
  /// the model seed and the task id.
  void add_task(int task);
  bool has_task(int task) const { return heads_.count(task) != 0; }
  std::vector<int> tasks() const;
  /// Freezes the head and routers of a finished task.
  void freeze_task(int task);
  bool task_frozen(int task) const;

  ForwardPass forward(const PatchBag& patches, const GenomicProfile& genomics, int task) const;

  ad::Tensor encode_patches(const PatchBag& patches, const GenomicProfile& genomics,
                            int task) const;
  ad::Tensor encode_genomics(const GenomicProfile& genomics, const PatchBag& patches,
                             int task) const;
  ad::Tensor fuse(const ad::Tensor& f_patch, const ad::Tensor& f_genomic, int task) const;
  ad::Tensor predict_hazards(const ad::Tensor& f_fused, int task) const;

  /// Parameters in a fixed order; heads and routers of frozen tasks are
  /// marked non-trainable.
  ad::ParameterSet parameters();

  /// Deep copy with independent parameter storage.
  Backbone clone() const;

  std::vector<ad::Matrix> snapshot() const;
  void restore(const std::vector<ad::Matrix>& values);

  const MoEModule* moe(MoESite site) const;
  MoEModule* moe(MoESite site);
  FeedForward& fusion_network() { return fusion_; }
  Linear& head(int task);

  template <typename F>
  void visit(F&& f) {
    patch_embed_.visit("patch_embed", f);
    for (std::size_t g = 0; g < group_embed_.size(); ++g) {
      group_embed_[g].visit("group_embed" + std::to_string(g), f);
    }
    patch_attention_.visit("patch_attention", f);
    patch_value_.visit("patch_value", f);
    genomic_attention_.visit("genomic_attention", f);
    genomic_value_.visit("genomic_value", f);
    if (config_.ms_moe) {
      moe_patch_.visit("moe_patch", f);
      moe_genomic_.visit("moe_genomic", f);
      moe_fusion_.visit("moe_fusion", f);
    } else {
      fusion_.visit("fusion", f);
    }
    for (auto& [task, head] : heads_) head.visit("head" + std::to_string(task), f);
  }

 private:
  struct Embeddings {
    ad::Tensor patches;  // n_patches x latent
    ad::Tensor groups;   // 6 x latent
  };

  Embeddings embed(const PatchBag& patches, const GenomicProfile& genomics) const;
  ad::Tensor pool_patches(const Embeddings& e) const;
  ad::Tensor pool_genomics(const Embeddings& e) const;
  void check_inputs(const PatchBag& patches, const GenomicProfile& genomics) const;

  BackboneConfig config_;
  FeedForward patch_embed_;
  std::vector<FeedForward> group_embed_;
  GatedAttention patch_attention_;
  Linear patch_value_;
  GatedAttention genomic_attention_;
  Linear genomic_value_;
  FeedForward fusion_;
  MoEModule moe_patch_;
  MoEModule moe_genomic_;
  MoEModule moe_fusion_;
  std::map<int, Linear> heads_;
  std::map<int, bool> frozen_;
};

}  // namespace survcl::model
