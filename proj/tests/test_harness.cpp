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

#include "survcl/error.hpp"
#include "survcl/harness/metrics.hpp"
#include "survcl/harness/trainer.hpp"
#include "survcl/synth/generator.hpp"

#include <doctest.h>

#include <cmath>

using namespace survcl;
using namespace survcl::harness;

namespace {

PerformanceMatrix two_task(double r10, double r11, double r20, double r21, double r00 = 0.5,
                           double r01 = 0.5) {
  PerformanceMatrix r(2, Metric::kCIndex);
  r.set(0, 0, r00);
  r.set(0, 1, r01);
  r.set(1, 0, r10);
  r.set(1, 1, r11);
  r.set(2, 0, r20);
  r.set(2, 1, r21);
  return r;
}

TaskStream small_stream(std::size_t n_tasks = 2, std::uint64_t seed = 5) {
  synth::GeneratorConfig g;
  g.n_tasks = n_tasks;
  g.cases_per_task = 40;
  g.min_patches = 3;
  g.max_patches = 6;
  g.patch_dim = 6;
  g.genomic_dims = {3, 4, 3, 4, 3, 4};
  g.latent_dim = 2;
  g.seed = seed;
  return synth::generate_stream(g).stream;
}

MethodConfig small_method(Method m, std::size_t epochs = 2) {
  MethodConfig cfg;
  cfg.method = m;
  cfg.epochs = epochs;
  cfg.architecture.latent = 8;
  cfg.architecture.hidden = 16;
  cfg.architecture.attention_hidden = 4;
  cfg.buffer_capacity = 8;
  cfg.seed = 11;
  return cfg;
}

void check_same_run(const SequenceResult& a, const SequenceResult& b) {
  REQUIRE(a.curves.size() == b.curves.size());
  for (std::size_t i = 0; i < a.curves.size(); ++i) {
    CHECK(a.curves[i].train_loss == b.curves[i].train_loss);
    CHECK(a.curves[i].validation_c_index == b.curves[i].validation_c_index);
  }
  const auto sa = a.model->snapshot();
  const auto sb = b.model->snapshot();
  REQUIRE(sa.size() == sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) CHECK(sa[i] == sb[i]);
  for (std::size_t row = 0; row < a.c_index.rows(); ++row) {
    for (std::size_t col = 0; col < a.c_index.n_tasks(); ++col) {
      CHECK(a.c_index.get(row, col) == b.c_index.get(row, col));
    }
  }
}

}  // namespace

TEST_CASE("performance matrix storage") {
  PerformanceMatrix r(3, Metric::kCIndexIpcw);
  CHECK(r.rows() == 4);
  CHECK_FALSE(r.has(1, 2));
  CHECK_THROWS_AS(r.at(1, 2), UndefinedMetricError);
  CHECK_THROWS_AS(r.set(0, 0, 1.5), DomainError);
  CHECK_THROWS_AS(r.set(4, 0, 0.5), DimensionError);
  r.set(1, 0, 0.7);
  r.set(1, 1, 0.6);
  CHECK_FALSE(r.row_complete(1));
  r.set(1, 2, 0.5);
  CHECK(r.row_complete(1));
  CHECK(r.filled_rows() == 1);
  CHECK(std::string(metric_name(r.metric())) == "c_index_ipcw");
}

TEST_CASE("headline metric examples") {
  const auto r = two_task(0.6, 0.55, 0.6, 0.5);
  CHECK(std::abs(average_performance(r) - 0.55) < 1e-15);

  const auto f = two_task(0.6, 0.55, 0.5, 0.7);
  CHECK(std::abs(forgetting(f) - 0.1) < 1e-15);
  CHECK(std::abs(bwt(f) - (-0.1)) < 1e-15);
  CHECK(std::abs(fwt(f) - 0.05) < 1e-15);

  PerformanceMatrix c(3, Metric::kCIndex);
  for (std::size_t l = 0; l < 4; ++l) {
    for (std::size_t j = 0; j < 3; ++j) c.set(l, j, 0.63);
  }
  CHECK(average_performance(c) == 0.63);
  CHECK(forgetting(c) == 0.0);
  CHECK(bwt(c) == 0.0);
  CHECK(fwt(c) == 0.0);

  // nondecreasing scores: no forgetting, nonnegative backward transfer
  PerformanceMatrix up(3, Metric::kCIndex);
  for (std::size_t l = 0; l < 4; ++l) {
    for (std::size_t j = 0; j < 3; ++j) up.set(l, j, 0.5 + 0.1 * static_cast<double>(l));
  }
  CHECK(forgetting(up) == 0.0);
  CHECK(bwt(up) > 0.0);
  CHECK(fwt(up) > 0.0);
  CHECK(std::abs(average_on_trained(up, 2) - 0.7) < 1e-15);

  PerformanceMatrix below = two_task(0.6, 0.45, 0.6, 0.6);
  CHECK(fwt(below) < 0.0);

  PerformanceMatrix one(1, Metric::kCIndex);
  one.set(0, 0, 0.5);
  one.set(1, 0, 0.71);
  CHECK(average_performance(one) == 0.71);
  CHECK_THROWS_AS(forgetting(one), UndefinedMetricError);
  CHECK_THROWS_AS(bwt(one), UndefinedMetricError);
  CHECK_THROWS_AS(fwt(one), UndefinedMetricError);
  const auto s = summarize(one);
  CHECK(s.average == 0.71);
  CHECK_FALSE(s.forget.has_value());
  CHECK_FALSE(s.bwt.has_value());
  CHECK_FALSE(s.fwt.has_value());
}

TEST_CASE("forgetting against a direct oracle") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + static_cast<std::size_t>(trial % 4);
    PerformanceMatrix r(k, Metric::kCIndex);
    std::vector<std::vector<double>> v(k + 1, std::vector<double>(k));
    for (std::size_t l = 0; l <= k; ++l) {
      for (std::size_t j = 0; j < k; ++j) r.set(l, j, v[l][j] = u(rng));
    }
    double forget = 0.0, back = 0.0, forward = 0.0;
    for (std::size_t j = 1; j < k; ++j) {  // 1-based task j
      double best = 0.0;
      for (std::size_t l = j; l <= k; ++l) best = std::max(best, v[l][j - 1]);
      forget += best - v[k][j - 1];
      back += v[k][j - 1] - v[j][j - 1];
    }
    for (std::size_t j = 2; j <= k; ++j) forward += v[j - 1][j - 1] - v[0][j - 1];
    const double n = static_cast<double>(k - 1);
    CHECK(std::abs(forgetting(r) - forget / n) < 1e-12);
    CHECK(std::abs(bwt(r) - back / n) < 1e-12);
    CHECK(std::abs(fwt(r) - forward / n) < 1e-12);
  }
}

TEST_CASE("method names") {
  for (auto m : {Method::kFinetune, Method::kJoint, Method::kEr, Method::kDerPP, Method::kConSurv}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("lwf"), ConfigError);
  CHECK(uses_ms_moe(small_method(Method::kConSurv)));
  CHECK_FALSE(uses_ms_moe(small_method(Method::kEr)));
  auto bad = small_method(Method::kFinetune);
  bad.epochs = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("train_task checkpoints") {
  const auto stream = small_stream(1);
  auto cfg = small_method(Method::kFinetune, 0);
  const auto splits = make_splits(stream, cfg);
  const TaskSplit split{&stream.tasks[0], splits[0].train, splits[0].validation};

  SUBCASE("zero epochs returns the initial parameters") {
    model::Backbone net(backbone_config(cfg, stream));
    net.add_task(0);
    const auto initial = net.snapshot();
    const auto r = train_task(net, std::span<const TaskSplit>(&split, 1), cfg, nullptr);
    CHECK(r.best_epoch == 0);
    CHECK_FALSE(r.best_validation.has_value());
    CHECK(r.checkpoint == initial);
    CHECK(net.snapshot() == initial);
  }
  SUBCASE("one epoch returns that epoch's parameters") {
    cfg.epochs = 1;
    model::Backbone net(backbone_config(cfg, stream));
    net.add_task(0);
    const auto initial = net.snapshot();
    const auto r = train_task(net, std::span<const TaskSplit>(&split, 1), cfg, nullptr);
    CHECK(r.best_epoch == 1);
    REQUIRE(r.curve.size() == 1);
    CHECK(r.best_validation == r.curve[0].validation_c_index);
    CHECK(r.checkpoint != initial);
    CHECK(net.snapshot() == r.checkpoint);
  }
  SUBCASE("best epoch has the highest validation score") {
    cfg.epochs = 4;
    model::Backbone net(backbone_config(cfg, stream));
    const auto r = train_task(net, std::span<const TaskSplit>(&split, 1), cfg, nullptr);
    for (const auto& e : r.curve) CHECK(e.validation_c_index <= *r.best_validation);
    for (const auto& e : r.curve) {
      if (e.epoch < r.best_epoch) CHECK(e.validation_c_index < *r.best_validation);
    }
    CHECK(std::abs(evaluate(net, stream.tasks[0], splits[0].validation).c_index -
                   *r.best_validation) < 1e-15);
  }
  SUBCASE("empty training split") {
    const std::vector<std::size_t> none;
    const TaskSplit empty{&stream.tasks[0], none, splits[0].validation};
    model::Backbone net(backbone_config(cfg, stream));
    CHECK_THROWS_AS(train_task(net, std::span<const TaskSplit>(&empty, 1), cfg, nullptr), DataError);
  }
}

TEST_CASE("splits") {
  const auto stream = small_stream(2);
  const auto cfg = small_method(Method::kFinetune);
  const auto a = make_splits(stream, cfg);
  const auto b = make_splits(stream, cfg);
  REQUIRE(a.size() == 2);
  for (std::size_t t = 0; t < 2; ++t) {
    CHECK(a[t].train == b[t].train);
    CHECK(a[t].validation == b[t].validation);
    CHECK(a[t].train.size() + a[t].validation.size() == stream.tasks[t].cases.size());
    CHECK(a[t].validation.size() == 8);
  }
}

TEST_CASE("sequence determinism and matrix shape") {
  const auto stream = small_stream(2);
  const auto cfg = small_method(Method::kConSurv);
  const auto a = run_sequence(cfg, stream);
  const auto b = run_sequence(cfg, stream);
  check_same_run(a, b);
  CHECK(a.c_index.filled_rows() == 3);
  CHECK(a.c_index_ipcw.filled_rows() == 3);
  CHECK(a.curves.size() == 4);
  CHECK(a.routing.size() == 2 * 3 * 8);
  for (const auto& rec : a.routing) CHECK((rec.proportion >= 0.0 && rec.proportion <= 1.0));
  // task 1 was untouched after row 1 only through shared parameters; its
  // head and routers are frozen
  CHECK(a.model->task_frozen(0));
  CHECK(a.model->task_frozen(1));
}

TEST_CASE("reduction chain") {
  const auto stream = small_stream(2);
  auto finetune = small_method(Method::kFinetune);
  finetune.ms_moe = true;
  auto consurv = small_method(Method::kConSurv);
  consurv.loss.alpha = 0.0;
  consurv.loss.beta = 0.0;
  auto er = small_method(Method::kEr);
  er.ms_moe = true;
  er.loss.beta = 0.0;

  const auto rf = run_sequence(finetune, stream);
  const auto rc = run_sequence(consurv, stream);
  const auto re = run_sequence(er, stream);
  check_same_run(rf, rc);
  check_same_run(rf, re);

  // replay without the feature constraint is plain experience replay
  consurv.loss.beta = 0.5;
  er.loss.beta = 0.5;
  const auto rc2 = run_sequence(consurv, stream);
  const auto re2 = run_sequence(er, stream);
  check_same_run(rc2, re2);
  CHECK(rc2.model->snapshot() != rc.model->snapshot());
}

TEST_CASE("joint training fills the final row only") {
  const auto stream = small_stream(2);
  const auto r = run_sequence(small_method(Method::kJoint), stream);
  CHECK(r.c_index.row_complete(0));
  CHECK_FALSE(r.c_index.has(1, 0));
  CHECK_FALSE(r.c_index.has(1, 1));
  CHECK(r.c_index.row_complete(2));
  CHECK(r.c_index.filled_rows() == 2);
  for (const auto& e : r.curves) CHECK(e.task == -1);
  const auto s = summarize(r.c_index);
  CHECK(s.average.has_value());
  CHECK_FALSE(s.forget.has_value());
  CHECK_FALSE(s.bwt.has_value());
}

TEST_CASE("task isolation") {
  const auto stream = small_stream(2);
  auto cfg = small_method(Method::kConSurv);
  cfg.epochs = 1;
  const auto r = run_sequence(cfg, stream);
  const auto splits = make_splits(stream, cfg);
  auto net = r.model->clone();
  const auto before = predict_risks(net, stream.tasks[0], splits[0].validation);
  // other task's head and routers do not enter task 0's predictions
  net.head(1).weight.mutable_value().setConstant(9.0);
  for (auto site : {model::MoESite::kPatch, model::MoESite::kGenomic, model::MoESite::kFusion}) {
    net.moe(site)->router(1).weight.mutable_value().setConstant(-4.0);
  }
  CHECK(predict_risks(net, stream.tasks[0], splits[0].validation) == before);
  net.head(0).bias.mutable_value().array() += 1.0;
  CHECK(predict_risks(net, stream.tasks[0], splits[0].validation) != before);

  // unseen task is scored through a fresh head without touching the model
  auto fresh = model::Backbone(backbone_config(cfg, stream));
  CHECK(predict_risks(fresh, stream.tasks[1], splits[1].validation).size() ==
        splits[1].validation.size());
  CHECK_FALSE(fresh.has_task(1));
}
