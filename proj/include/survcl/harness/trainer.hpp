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

#include "survcl/autodiff/optim.hpp"
#include "survcl/data.hpp"
#include "survcl/fcr/replay.hpp"
#include "survcl/harness/metrics.hpp"
#include "survcl/model/backbone.hpp"
#include "survcl/survival/discrete.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace survcl::harness {

enum class Method { kFinetune, kJoint, kEr, kDerPP, kConSurv };

const char* method_name(Method m);
/// Accepts finetune, joint, er, der_pp and consurv.
Method parse_method(const std::string& name);

struct MethodConfig {
  Method method = Method::kConSurv;
  std::size_t epochs = 20;
  ad::AdamWConfig optimizer;
  fcr::CLLossConfig loss;
  survival::SurvLossConfig survival;
  std::size_t buffer_capacity = 32;
  /// Validation is fold `fold` of an n_folds split of every task.
  std::size_t n_folds = 5;
  std::size_t fold = 0;
  /// Unset: MS-MoE for consurv only.
  std::optional<bool> ms_moe;
  /// Layer widths and expert counts; input widths, bin count and seed are
  /// taken from the stream and the run.
  model::BackboneConfig architecture;
  std::uint64_t seed = 0;
};

bool uses_ms_moe(const MethodConfig& cfg);
bool uses_buffer(Method m);
void validate(const MethodConfig& cfg);

/// Backbone configuration for a stream under a method configuration.
model::BackboneConfig backbone_config(const MethodConfig& cfg, const TaskStream& stream);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Per-task train/validation split derived from the run seed.
std::vector<SplitIndices> make_splits(const TaskStream& stream, const MethodConfig& cfg);

/// Cases of one task used in one training call.
struct TaskSplit {
  const TaskDataset* data = nullptr;
  std::span<const std::size_t> train;
  std::span<const std::size_t> validation;
};

/// Buffer and random stream shared by all tasks of one sequence.
struct ReplayState {
  ReplayState(std::size_t capacity, std::uint64_t seed);

  fcr::ReplayBuffer buffer;
  fcr::Rng rng;
};

struct EpochRecord {
  int task = 0;  // -1 for the joint method's single training call
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_c_index = 0.0;
};

struct TrainResult {
  std::vector<ad::Matrix> checkpoint;
  /// 0 when no epoch ran and the checkpoint is the initial model.
  std::size_t best_epoch = 0;
  std::optional<double> best_validation;
  std::vector<EpochRecord> curve;
};

/// Trains on the union of the given splits for cfg.epochs epochs of
/// single-case steps, validating after every epoch. The model is left at,
/// and the result holds, the epoch with the best mean validation C-index
/// (earliest on ties). Methods with a buffer stream every training case
/// into it.
TrainResult train_task(model::Backbone& net, std::span<const TaskSplit> splits,
                       const MethodConfig& cfg, ReplayState* replay);

struct Evaluation {
  double c_index = 0.0;
  double c_index_ipcw = 0.0;
};

/// Risk scores of the selected cases through the task's own head and
/// routers. A task the model has not seen yet is scored by a copy that
/// receives the task's initial head.
std::vector<double> predict_risks(const model::Backbone& net, const TaskDataset& data,
                                  std::span<const std::size_t> indices);
Evaluation evaluate(const model::Backbone& net, const TaskDataset& data,
                    std::span<const std::size_t> indices);

struct RoutingRecord {
  int task = 0;
  model::MoESite site = model::MoESite::kPatch;
  std::size_t expert = 0;
  double proportion = 0.0;
};

/// Fraction of the selected cases on which each expert of each MS-MoE stage
/// was active. Empty for a model without MS-MoE.
std::vector<RoutingRecord> routing_proportions(const model::Backbone& net,
                                               const TaskDataset& data,
                                               std::span<const std::size_t> indices);

struct SequenceResult {
  PerformanceMatrix c_index;
  PerformanceMatrix c_index_ipcw;
  std::vector<EpochRecord> curves;
  std::vector<RoutingRecord> routing;
  std::vector<SplitIndices> splits;
  std::optional<model::Backbone> model;
};

/// Runs the method over the stream: row 0 from the untrained model, then
/// one training call and one evaluation row per task. The joint method
/// trains once on all tasks and fills only the final row.
SequenceResult run_sequence(const MethodConfig& cfg, const TaskStream& stream);

}  // namespace survcl::harness
