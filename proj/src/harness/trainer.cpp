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

#include "survcl/harness/trainer.hpp"

#include "survcl/autodiff/ops.hpp"
#include "survcl/error.hpp"
#include "survcl/model/layers.hpp"
#include "survcl/survival/statistics.hpp"
#include "survcl/synth/folds.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <utility>

namespace survcl::harness {

namespace {

// Tags separating the random streams derived from one run seed.
constexpr std::uint64_t kSplitTag = 0x5350;
constexpr std::uint64_t kShuffleTag = 0x5348;
constexpr std::uint64_t kReplayTag = 0x5250;
constexpr std::uint64_t kJointTask = 0xFFFF;

constexpr std::array<std::pair<Method, const char*>, 5> kMethodNames = {{
    {Method::kFinetune, "finetune"},
    {Method::kJoint, "joint"},
    {Method::kEr, "er"},
    {Method::kDerPP, "der_pp"},
    {Method::kConSurv, "consurv"},
}};

struct StepCase {
  const TaskDataset* data;
  std::size_t index;
};

ad::Tensor method_loss(const model::Backbone& net, const model::ForwardPass& pass,
                       const CaseRecord& c, const MethodConfig& cfg, ReplayState* replay) {
  ad::Tensor loss = survival::nll_survival_loss(pass.hazards, c.label, c.censor, cfg.survival);
  if (replay == nullptr) return loss;
  const auto batch = replay->buffer.sample(cfg.loss.replay_count, replay->rng);
  const double zeta = cfg.loss.zeta;
  switch (cfg.method) {
    case Method::kEr: {
      const auto t = fcr::replay_terms(net, batch, cfg.survival,
                                       {.features = false, .replay = true, .logits = false});
      return loss + t.replay * (zeta * cfg.loss.beta);
    }
    case Method::kDerPP: {
      const auto t = fcr::replay_terms(net, batch, cfg.survival,
                                       {.features = false, .replay = true, .logits = true});
      return loss + t.logit * (zeta * cfg.loss.alpha) + t.replay * (zeta * cfg.loss.beta);
    }
    case Method::kConSurv: {
      const auto t = fcr::replay_terms(net, batch, cfg.survival,
                                       {.features = true, .replay = true, .logits = false});
      return fcr::total_loss(loss, t.feature, t.replay, cfg.loss);
    }
    default:
      return loss;
  }
}

fcr::ReplayItem make_item(const CaseRecord& c, const model::ForwardPass& pass, Method method) {
  fcr::ReplayItem item;
  item.patches = c.patches;
  item.genomics = c.genomics;
  item.label = c.label;
  item.censor = c.censor;
  item.task = c.task;
  if (method == Method::kConSurv) item.features = pass.features();
  if (method == Method::kDerPP) item.logits = pass.logits.to_vector();
  return item;
}

double validation_score(const model::Backbone& net, std::span<const TaskSplit> splits) {
  double total = 0.0;
  for (const auto& s : splits) {
    const auto risks = predict_risks(net, *s.data, s.validation);
    std::vector<double> times;
    std::vector<int> censor;
    for (std::size_t i : s.validation) {
      times.push_back(s.data->cases[i].time);
      censor.push_back(s.data->cases[i].censor);
    }
    total += survival::c_index(risks, times, censor);
  }
  return total / static_cast<double>(splits.size());
}

}  // namespace

const char* method_name(Method m) {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  throw ContractError("unknown method");
}

Method parse_method(const std::string& name) {
  for (const auto& [method, n] : kMethodNames) {
    if (name == n) return method;
  }
  throw ConfigError("unknown method '" + name + "'");
}

bool uses_ms_moe(const MethodConfig& cfg) {
  return cfg.ms_moe.value_or(cfg.method == Method::kConSurv);
}

bool uses_buffer(Method m) {
  return m == Method::kEr || m == Method::kDerPP || m == Method::kConSurv;
}

void validate(const MethodConfig& cfg) {
  fcr::validate(cfg.loss);
  if (cfg.epochs == 0) throw ConfigError("epochs must be positive");
  const auto& o = cfg.optimizer;
  if (!(o.learning_rate >= 0.0) || !(o.weight_decay >= 0.0)) {
    throw ConfigError("learning rate and weight decay must be nonnegative");
  }
  if (!(o.beta1 >= 0.0 && o.beta1 < 1.0) || !(o.beta2 >= 0.0 && o.beta2 < 1.0) ||
      !(o.eps > 0.0)) {
    throw ConfigError("invalid moment constants");
  }
  if (!(cfg.survival.alpha_s >= 0.0 && cfg.survival.alpha_s <= 1.0)) {
    throw ConfigError("alpha_s must lie in [0, 1]");
  }
  if (cfg.buffer_capacity == 0) throw ConfigError("buffer capacity must be positive");
  if (cfg.n_folds < 2 || cfg.fold >= cfg.n_folds) throw ConfigError("invalid fold selection");
}

model::BackboneConfig backbone_config(const MethodConfig& cfg, const TaskStream& stream) {
  if (stream.size() == 0) throw DataError("task stream is empty");
  model::BackboneConfig arch = cfg.architecture;
  arch.patch_dim = stream.patch_dim();
  arch.genomic_width = stream.genomic_width();
  arch.n_bins = stream.tasks.front().bins.n_bins;
  arch.ms_moe = uses_ms_moe(cfg);
  arch.seed = cfg.seed;
  return arch;
}

std::vector<SplitIndices> make_splits(const TaskStream& stream, const MethodConfig& cfg) {
  std::vector<SplitIndices> out;
  for (const auto& t : stream.tasks) {
    const auto censor = t.censor();
    auto rng = model::derive_rng(cfg.seed, {kSplitTag, static_cast<std::uint64_t>(t.task)});
    auto folds = synth::split_folds(censor, cfg.n_folds, rng());
    out.push_back({std::move(folds[cfg.fold].train), std::move(folds[cfg.fold].validation)});
  }
  return out;
}

ReplayState::ReplayState(std::size_t capacity, std::uint64_t seed)
    : buffer(capacity), rng(model::derive_rng(seed, {kReplayTag})) {}

TrainResult train_task(model::Backbone& net, std::span<const TaskSplit> splits,
                       const MethodConfig& cfg, ReplayState* replay) {
  if (splits.empty()) throw ContractError("train_task needs at least one split");
  std::vector<StepCase> order;
  for (const auto& s : splits) {
    if (s.train.empty()) throw DataError("task '" + s.data->name + "' has an empty training split");
    if (s.validation.empty()) {
      throw DataError("task '" + s.data->name + "' has an empty validation split");
    }
    if (!net.has_task(s.data->task)) net.add_task(s.data->task);
    for (std::size_t i : s.train) order.push_back({s.data, i});
  }
  const std::uint64_t stream_tag =
      splits.size() == 1 ? static_cast<std::uint64_t>(splits.front().data->task) : kJointTask;
  auto shuffle_rng = model::derive_rng(cfg.seed, {kShuffleTag, stream_tag});
  const int record_task = splits.size() == 1 ? splits.front().data->task : -1;

  TrainResult result;
  result.checkpoint = net.snapshot();
  auto params = net.parameters();
  ad::AdamW optimizer(cfg.optimizer);
  double best = -std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_total = 0.0;
    for (const auto& sc : order) {
      const CaseRecord& c = sc.data->cases[sc.index];
      const auto pass = net.forward(c.patches, c.genomics, c.task);
      const ad::Tensor loss = method_loss(net, pass, c, cfg, replay);
      params.zero_grad();
      ad::backward(loss);
      optimizer.step(params);
      loss_total += loss.item();
      if (replay != nullptr) replay->buffer.reservoir_update(make_item(c, pass, cfg.method), replay->rng);
    }
    const double score = validation_score(net, splits);
    result.curve.push_back(
        {record_task, epoch, loss_total / static_cast<double>(order.size()), score});
    if (score > best) {
      best = score;
      result.best_epoch = epoch;
      result.best_validation = score;
      result.checkpoint = net.snapshot();
    }
  }
  net.restore(result.checkpoint);
  return result;
}

std::vector<double> predict_risks(const model::Backbone& net, const TaskDataset& data,
                                  std::span<const std::size_t> indices) {
  if (!net.has_task(data.task)) {
    auto copy = net.clone();
    copy.add_task(data.task);
    return predict_risks(copy, data, indices);
  }
  std::vector<double> risks;
  risks.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto& c = data.cases.at(i);
    const auto pass = net.forward(c.patches, c.genomics, data.task);
    risks.push_back(survival::risk_score(pass.hazards.to_vector()));
  }
  return risks;
}

Evaluation evaluate(const model::Backbone& net, const TaskDataset& data,
                    std::span<const std::size_t> indices) {
  const auto risks = predict_risks(net, data, indices);
  std::vector<double> times;
  std::vector<int> censor;
  for (std::size_t i : indices) {
    times.push_back(data.cases[i].time);
    censor.push_back(data.cases[i].censor);
  }
  Evaluation e;
  e.c_index = survival::c_index(risks, times, censor);
  e.c_index_ipcw =
      survival::c_index_ipcw(risks, times, censor, survival::default_ipcw_tau(times, censor));
  return e;
}

std::vector<RoutingRecord> routing_proportions(const model::Backbone& net,
                                               const TaskDataset& data,
                                               std::span<const std::size_t> indices) {
  std::vector<RoutingRecord> out;
  if (!net.config().ms_moe || indices.empty()) return out;
  if (!net.has_task(data.task)) {
    auto copy = net.clone();
    copy.add_task(data.task);
    return routing_proportions(copy, data, indices);
  }
  const std::size_t n_experts = net.config().moe.n_experts;
  std::array<std::vector<std::size_t>, 3> counts;
  for (auto& c : counts) c.assign(n_experts, 0);
  for (std::size_t i : indices) {
    const auto& c = data.cases.at(i);
    const auto pass = net.forward(c.patches, c.genomics, data.task);
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t e : pass.gating[s].selected) ++counts[s][e];
    }
  }
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t e = 0; e < n_experts; ++e) {
      out.push_back({data.task, static_cast<model::MoESite>(s), e,
                     static_cast<double>(counts[s][e]) / static_cast<double>(indices.size())});
    }
  }
  return out;
}

SequenceResult run_sequence(const MethodConfig& cfg, const TaskStream& stream) {
  validate(cfg);
  const std::size_t k = stream.size();
  SequenceResult result;
  result.c_index = PerformanceMatrix(k, Metric::kCIndex);
  result.c_index_ipcw = PerformanceMatrix(k, Metric::kCIndexIpcw);
  result.splits = make_splits(stream, cfg);
  model::Backbone net(backbone_config(cfg, stream));

  auto fill_row = [&](std::size_t row) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto e = evaluate(net, stream.tasks[j], result.splits[j].validation);
      result.c_index.set(row, j, e.c_index);
      result.c_index_ipcw.set(row, j, e.c_index_ipcw);
    }
  };
  auto split_of = [&](std::size_t j) {
    return TaskSplit{&stream.tasks[j], result.splits[j].train, result.splits[j].validation};
  };

  fill_row(0);
  std::optional<ReplayState> replay;
  if (uses_buffer(cfg.method)) replay.emplace(cfg.buffer_capacity, cfg.seed);

  if (cfg.method == Method::kJoint) {
    std::vector<TaskSplit> all;
    for (std::size_t j = 0; j < k; ++j) all.push_back(split_of(j));
    auto trained = train_task(net, all, cfg, nullptr);
    result.curves = std::move(trained.curve);
    fill_row(k);
  } else {
    for (std::size_t j = 0; j < k; ++j) {
      const TaskSplit split = split_of(j);
      auto trained =
          train_task(net, std::span<const TaskSplit>(&split, 1), cfg, replay ? &*replay : nullptr);
      result.curves.insert(result.curves.end(), trained.curve.begin(), trained.curve.end());
      net.freeze_task(stream.tasks[j].task);
      fill_row(j + 1);
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    auto r = routing_proportions(net, stream.tasks[j], result.splits[j].validation);
    result.routing.insert(result.routing.end(), r.begin(), r.end());
  }
  result.model.emplace(std::move(net));
  return result;
}

}  // namespace survcl::harness
