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

#include "survcl/fcr/replay.hpp"

#include "survcl/autodiff/ops.hpp"
#include "survcl/error.hpp"
#include "survcl/io/binary.hpp"

#include <cstring>

namespace survcl::fcr {

namespace {

constexpr char kMagic[4] = {'S', 'C', 'R', 'B'};
constexpr std::uint8_t kVersion = 1;

ad::Tensor zero_scalar() { return ad::Tensor::scalar(0.0); }

ad::Tensor squared_distance(const ad::Tensor& current, const std::vector<double>& frozen) {
  if (current.size() != frozen.size()) {
    throw DimensionError("stored feature width differs from the model's");
  }
  return ad::sum(ad::square(current - ad::Tensor::vector(frozen)));
}

void write_matrix(io::BinaryWriter& w, const ad::Matrix& m) {
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) w.f64(m.data()[i]);
}

ad::Matrix read_matrix(io::BinaryReader& r, const char* field) {
  const auto rows = r.u32(field);
  const auto cols = r.u32(field);
  if (static_cast<std::uint64_t>(rows) * cols > (1ULL << 28)) {
    throw DataError(r.path() + ": implausible matrix size for '" + field + "'");
  }
  ad::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f64(field);
  return m;
}

void write_vector(io::BinaryWriter& w, const std::vector<double>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (double x : v) w.f64(x);
}

std::vector<double> read_vector(io::BinaryReader& r, const char* field) {
  const auto n = r.u32(field);
  if (n > (1U << 24)) throw DataError(r.path() + ": implausible length for '" + field + "'");
  std::vector<double> v(n);
  for (auto& x : v) x = r.f64(field);
  return v;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
  items_.reserve(capacity);
}

std::optional<std::size_t> ReplayBuffer::reserve_slot(Rng& rng) {
  const std::uint64_t n = seen_++;
  if (items_.size() < capacity_) return items_.size();
  // Algorithm R: keep the (n+1)-th item with probability capacity / (n+1).
  std::uniform_int_distribution<std::uint64_t> dist(0, n);
  const std::uint64_t j = dist(rng);
  if (j < capacity_) return static_cast<std::size_t>(j);
  return std::nullopt;
}

void ReplayBuffer::store(std::size_t slot, ReplayItem item) {
  if (slot == items_.size() && slot < capacity_) {
    items_.push_back(std::move(item));
  } else if (slot < items_.size()) {
    items_[slot] = std::move(item);
  } else {
    throw ContractError("replay slot out of range");
  }
}

bool ReplayBuffer::reservoir_update(ReplayItem item, Rng& rng) {
  const auto slot = reserve_slot(rng);
  if (!slot) return false;
  store(*slot, std::move(item));
  return true;
}

std::vector<const ReplayItem*> ReplayBuffer::sample(std::size_t r, Rng& rng) const {
  std::vector<const ReplayItem*> out;
  if (items_.empty()) return out;
  std::uniform_int_distribution<std::size_t> dist(0, items_.size() - 1);
  out.reserve(r);
  for (std::size_t i = 0; i < r; ++i) out.push_back(&items_[dist(rng)]);
  return out;
}

void ReplayBuffer::save(const std::string& path) const {
  io::BinaryWriter w(path);
  w.bytes(kMagic, 4);
  w.u8(kVersion);
  w.u8(0);
  w.u8(0);
  w.u8(0);
  w.u64(capacity_);
  w.u64(seen_);
  w.u64(items_.size());
  for (const auto& item : items_) {
    w.i32(item.task);
    w.u32(static_cast<std::uint32_t>(item.label));
    w.u8(static_cast<std::uint8_t>(item.censor));
    write_matrix(w, item.patches.features);
    write_matrix(w, item.genomics.groups);
    write_vector(w, item.features.patch);
    write_vector(w, item.features.genomic);
    write_vector(w, item.features.fused);
    write_vector(w, item.logits);
  }
  w.close();
}

ReplayBuffer ReplayBuffer::load(const std::string& path) {
  io::BinaryReader r(path);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw DataError(path + ": bad magic in replay buffer");
  const auto version = r.u8("version");
  if (version != kVersion) throw DataError(path + ": unsupported replay buffer version");
  for (int i = 0; i < 3; ++i) r.u8("reserved");
  const auto capacity = r.u64("capacity");
  if (capacity == 0 || capacity > (1ULL << 32)) throw DataError(path + ": bad capacity");
  ReplayBuffer buffer(static_cast<std::size_t>(capacity));
  buffer.seen_ = r.u64("seen_count");
  const auto n = r.u64("item_count");
  if (n > capacity || n > buffer.seen_) throw DataError(path + ": item count exceeds capacity");
  for (std::uint64_t i = 0; i < n; ++i) {
    ReplayItem item;
    item.task = r.i32("task");
    item.label = r.u32("label");
    item.censor = r.u8("censor");
    item.patches.features = read_matrix(r, "patches");
    item.genomics.groups = read_matrix(r, "genomics");
    item.features.patch = read_vector(r, "f_patch");
    item.features.genomic = read_vector(r, "f_genomic");
    item.features.fused = read_vector(r, "f_fused");
    item.logits = read_vector(r, "logits");
    buffer.items_.push_back(std::move(item));
  }
  return buffer;
}

ReplayTerms replay_terms(const model::Backbone& net, std::span<const ReplayItem* const> items,
                         const survival::SurvLossConfig& surv, ReplayTermsRequest request) {
  ReplayTerms terms;
  if (items.empty()) {
    terms.patch = terms.genomic = terms.fused = terms.feature = zero_scalar();
    terms.replay = terms.logit = zero_scalar();
    return terms;
  }
  const double inv_n = 1.0 / static_cast<double>(items.size());
  ad::Tensor lp, lg, lf, lr, ll;
  auto accumulate = [](ad::Tensor& acc, const ad::Tensor& term) {
    acc = acc.defined() ? acc + term : term;
  };
  for (const ReplayItem* item : items) {
    const auto pass = net.forward(item->patches, item->genomics, item->task);
    if (request.features) {
      accumulate(lp, squared_distance(pass.f_patch, item->features.patch));
      accumulate(lg, squared_distance(pass.f_genomic, item->features.genomic));
      accumulate(lf, squared_distance(pass.f_fused, item->features.fused));
    }
    if (request.replay) {
      accumulate(lr, survival::nll_survival_loss(pass.hazards, item->label, item->censor, surv));
    }
    if (request.logits) {
      accumulate(ll, ad::mean(ad::square(pass.logits - ad::Tensor::vector(item->logits))));
    }
  }
  auto finish = [&](const ad::Tensor& acc) { return acc.defined() ? acc * inv_n : zero_scalar(); };
  terms.patch = finish(lp);
  terms.genomic = finish(lg);
  terms.fused = finish(lf);
  terms.feature = terms.patch + terms.genomic + terms.fused;
  terms.replay = finish(lr);
  terms.logit = finish(ll);
  return terms;
}

ad::Tensor feature_constraint_loss(const model::Backbone& net,
                                   std::span<const ReplayItem* const> items) {
  return replay_terms(net, items, {}, {.features = true, .replay = false, .logits = false})
      .feature;
}

ad::Tensor replay_loss(const model::Backbone& net, std::span<const ReplayItem* const> items,
                       const survival::SurvLossConfig& surv) {
  return replay_terms(net, items, surv, {.features = false, .replay = true, .logits = false})
      .replay;
}

ad::Tensor total_loss(const ad::Tensor& current, const ad::Tensor& feature,
                      const ad::Tensor& replay, const CLLossConfig& cfg) {
  return current + feature * cfg.alpha + replay * cfg.beta;
}

double total_loss(double current, double feature, double replay, const CLLossConfig& cfg) {
  return current + cfg.alpha * feature + cfg.beta * replay;
}

void validate(const CLLossConfig& cfg) {
  if (!(cfg.alpha >= 0.0) || !(cfg.beta >= 0.0) || !(cfg.zeta >= 0.0)) {
    throw ConfigError("loss weights alpha, beta and zeta must be nonnegative");
  }
  if (cfg.replay_count == 0) throw ConfigError("replay_count must be positive");
}

}  // namespace survcl::fcr
