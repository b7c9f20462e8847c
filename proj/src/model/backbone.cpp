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

#include "survcl/model/backbone.hpp"

#include "survcl/autodiff/ops.hpp"
#include "survcl/error.hpp"

#include <unordered_set>

namespace survcl::model {

namespace {

constexpr std::uint64_t kTrunkTag = 1;
constexpr std::uint64_t kHeadTag = 2;
constexpr std::uint64_t kMoEPatchTag = 3;
constexpr std::uint64_t kMoEGenomicTag = 4;
constexpr std::uint64_t kMoEFusionTag = 5;

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) {
  auto rng = derive_rng(seed, {tag});
  return rng();
}

ad::Tensor bag_tensor(const PatchBag& patches) {
  const auto& m = patches.features;
  return ad::Tensor::matrix(patches.size(), patches.dim(),
                            std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
}

ad::Tensor group_tensor(const GenomicProfile& genomics, std::size_t g) {
  const auto row = genomics.groups.row(static_cast<Eigen::Index>(g));
  return ad::Tensor::vector(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
}

}  // namespace

FeatureTriple ForwardPass::features() const {
  return {f_patch.to_vector(), f_genomic.to_vector(), f_fused.to_vector()};
}

Backbone::Backbone(BackboneConfig config) : config_(config) {
  if (config.latent == 0 || config.hidden == 0 || config.attention_hidden == 0 ||
      config.patch_dim == 0 || config.genomic_width == 0) {
    throw ConfigError("backbone widths must be positive");
  }
  if (config.n_bins < 2) throw ConfigError("at least two bins are required");
  const std::size_t d = config.latent;
  auto rng = derive_rng(config.seed, {kTrunkTag});
  patch_embed_ = FeedForward::init(config.patch_dim, config.hidden, d, rng);
  for (std::size_t g = 0; g < kGenomicGroups; ++g) {
    group_embed_.push_back(FeedForward::init(config.genomic_width, config.hidden, d, rng));
  }
  patch_attention_ = GatedAttention::init(2 * d, config.attention_hidden, rng);
  patch_value_ = Linear::init(2 * d, d, rng);
  genomic_attention_ = GatedAttention::init(2 * d, config.attention_hidden, rng);
  genomic_value_ = Linear::init(2 * d, d, rng);
  if (config.ms_moe) {
    moe_patch_ = MoEModule(d, d, d, config.moe, IntegrationMode::kAppend,
                           sub_seed(config.seed, kMoEPatchTag));
    moe_genomic_ = MoEModule(d, d, d, config.moe, IntegrationMode::kAppend,
                             sub_seed(config.seed, kMoEGenomicTag));
    moe_fusion_ = MoEModule(2 * d, config.hidden, d, config.moe, IntegrationMode::kReplace,
                            sub_seed(config.seed, kMoEFusionTag));
  } else {
    fusion_ = FeedForward::init(2 * d, config.hidden, d, rng);
  }
}

void Backbone::add_task(int task) {
  if (has_task(task)) {
    throw ContractError("task " + std::to_string(task) + " already has a head");
  }
  auto rng = derive_rng(config_.seed, {kHeadTag, static_cast<std::uint64_t>(task)});
  heads_.emplace(task, Linear::init(config_.latent, config_.n_bins, rng));
  frozen_[task] = false;
  if (config_.ms_moe) {
    moe_patch_.add_task_router(task);
    moe_genomic_.add_task_router(task);
    moe_fusion_.add_task_router(task);
  }
}

std::vector<int> Backbone::tasks() const {
  std::vector<int> out;
  for (const auto& [task, _] : heads_) out.push_back(task);
  return out;
}

void Backbone::freeze_task(int task) {
  head(task);
  frozen_[task] = true;
  if (config_.ms_moe) {
    moe_patch_.freeze_router(task);
    moe_genomic_.freeze_router(task);
    moe_fusion_.freeze_router(task);
  }
}

bool Backbone::task_frozen(int task) const {
  const auto it = frozen_.find(task);
  return it != frozen_.end() && it->second;
}

Linear& Backbone::head(int task) {
  const auto it = heads_.find(task);
  if (it == heads_.end()) throw UnknownTaskError("no head for task " + std::to_string(task));
  return it->second;
}

const MoEModule* Backbone::moe(MoESite site) const {
  if (!config_.ms_moe) return nullptr;
  switch (site) {
    case MoESite::kPatch:
      return &moe_patch_;
    case MoESite::kGenomic:
      return &moe_genomic_;
    case MoESite::kFusion:
      return &moe_fusion_;
  }
  return nullptr;
}

MoEModule* Backbone::moe(MoESite site) {
  return const_cast<MoEModule*>(static_cast<const Backbone*>(this)->moe(site));
}

void Backbone::check_inputs(const PatchBag& patches, const GenomicProfile& genomics) const {
  if (patches.size() == 0) throw ContractError("empty patch bag");
  if (patches.dim() != config_.patch_dim) {
    throw DimensionError("patch dimension " + std::to_string(patches.dim()) + " != " +
                         std::to_string(config_.patch_dim));
  }
  if (static_cast<std::size_t>(genomics.groups.rows()) != kGenomicGroups) {
    throw ContractError("genomic profile must have 6 groups, got " +
                        std::to_string(genomics.groups.rows()));
  }
  if (genomics.width() != config_.genomic_width) {
    throw DimensionError("genomic width " + std::to_string(genomics.width()) + " != " +
                         std::to_string(config_.genomic_width));
  }
}

Backbone::Embeddings Backbone::embed(const PatchBag& patches,
                                     const GenomicProfile& genomics) const {
  check_inputs(patches, genomics);
  Embeddings e;
  e.patches = patch_embed_(bag_tensor(patches));
  std::vector<ad::Tensor> rows;
  rows.reserve(kGenomicGroups);
  for (std::size_t g = 0; g < kGenomicGroups; ++g) {
    rows.push_back(group_embed_[g](group_tensor(genomics, g)));
  }
  e.groups = ad::stack_rows(rows);
  return e;
}

ad::Tensor Backbone::pool_patches(const Embeddings& e) const {
  const std::size_t n = e.patches.rows();
  const ad::Tensor context = ad::repeat_rows(ad::mean_rows(e.groups), n);
  const ad::Tensor z = ad::concat_cols(e.patches, context);
  const ad::Tensor attention = ad::softmax(patch_attention_.scores(z));
  return patch_value_(ad::matmul(attention, z));
}

ad::Tensor Backbone::pool_genomics(const Embeddings& e) const {
  const ad::Tensor context = ad::repeat_rows(ad::mean_rows(e.patches), kGenomicGroups);
  const ad::Tensor z = ad::concat_cols(e.groups, context);
  const ad::Tensor attention = ad::softmax(genomic_attention_.scores(z));
  return genomic_value_(ad::matmul(attention, z));
}

ad::Tensor Backbone::encode_patches(const PatchBag& patches, const GenomicProfile& genomics,
                                    int task) const {
  const ad::Tensor pooled = pool_patches(embed(patches, genomics));
  return config_.ms_moe ? moe_patch_.forward(pooled, task) : pooled;
}

ad::Tensor Backbone::encode_genomics(const GenomicProfile& genomics, const PatchBag& patches,
                                     int task) const {
  const ad::Tensor pooled = pool_genomics(embed(patches, genomics));
  return config_.ms_moe ? moe_genomic_.forward(pooled, task) : pooled;
}

ad::Tensor Backbone::fuse(const ad::Tensor& f_patch, const ad::Tensor& f_genomic,
                          int task) const {
  if (f_patch.size() != config_.latent || f_genomic.size() != config_.latent) {
    throw DimensionError("fuse: representations must have the latent width");
  }
  const ad::Tensor joint = ad::concat(f_patch, f_genomic);
  return config_.ms_moe ? moe_fusion_.forward(joint, task) : fusion_(joint);
}

ad::Tensor Backbone::predict_hazards(const ad::Tensor& f_fused, int task) const {
  const auto it = heads_.find(task);
  if (it == heads_.end()) throw UnknownTaskError("no head for task " + std::to_string(task));
  return ad::sigmoid(it->second(f_fused));
}

ForwardPass Backbone::forward(const PatchBag& patches, const GenomicProfile& genomics,
                              int task) const {
  const auto head_it = heads_.find(task);
  if (head_it == heads_.end()) throw UnknownTaskError("no head for task " + std::to_string(task));
  const Embeddings e = embed(patches, genomics);
  ForwardPass out;
  const ad::Tensor pooled_p = pool_patches(e);
  const ad::Tensor pooled_g = pool_genomics(e);
  if (config_.ms_moe) {
    out.moe_inputs[0] = pooled_p;
    out.f_patch = moe_patch_.forward(pooled_p, task, &out.gating[0]);
    out.moe_inputs[1] = pooled_g;
    out.f_genomic = moe_genomic_.forward(pooled_g, task, &out.gating[1]);
    const ad::Tensor joint = ad::concat(out.f_patch, out.f_genomic);
    out.moe_inputs[2] = joint;
    out.f_fused = moe_fusion_.forward(joint, task, &out.gating[2]);
  } else {
    out.f_patch = pooled_p;
    out.f_genomic = pooled_g;
    out.f_fused = fusion_(ad::concat(pooled_p, pooled_g));
  }
  out.logits = head_it->second(out.f_fused);
  out.hazards = ad::sigmoid(out.logits);
  return out;
}

ad::ParameterSet Backbone::parameters() {
  std::unordered_set<const void*> frozen;
  for (const auto& [task, is_frozen] : frozen_) {
    if (!is_frozen) continue;
    auto& h = heads_.at(task);
    frozen.insert(h.weight.node());
    frozen.insert(h.bias.node());
    if (config_.ms_moe) {
      for (auto* m : {&moe_patch_, &moe_genomic_, &moe_fusion_}) {
        frozen.insert(m->router(task).weight.node());
        frozen.insert(m->router(task).bias.node());
      }
    }
  }
  ad::ParameterSet params;
  visit([&](const std::string& name, ad::Tensor& t) {
    params.add(name, t, frozen.count(t.node()) == 0);
  });
  return params;
}

Backbone Backbone::clone() const {
  Backbone copy = *this;
  copy.visit([](const std::string&, ad::Tensor& t) { t = t.clone_leaf(); });
  return copy;
}

std::vector<ad::Matrix> Backbone::snapshot() const {
  std::vector<ad::Matrix> out;
  const_cast<Backbone*>(this)->visit(
      [&](const std::string&, ad::Tensor& t) { out.push_back(t.value()); });
  return out;
}

void Backbone::restore(const std::vector<ad::Matrix>& values) {
  std::size_t i = 0;
  visit([&](const std::string& name, ad::Tensor& t) {
    if (i >= values.size() || values[i].rows() != t.value().rows() ||
        values[i].cols() != t.value().cols()) {
      throw ContractError("snapshot does not match parameter '" + name + "'");
    }
    t.mutable_value() = values[i++];
  });
  if (i != values.size()) throw ContractError("snapshot has extra entries");
}

}  // namespace survcl::model
