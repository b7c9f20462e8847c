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

// Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any
// criterion fails.

#include "oracles.hpp"

#include "survcl/autodiff/gradcheck.hpp"
#include "survcl/autodiff/ops.hpp"
#include "survcl/error.hpp"
#include "survcl/fcr/replay.hpp"
#include "survcl/harness/metrics.hpp"
#include "survcl/harness/trainer.hpp"
#include "survcl/io/feature_bag.hpp"
#include "survcl/io/report.hpp"
#include "survcl/model/backbone.hpp"
#include "survcl/model/moe.hpp"
#include "survcl/survival/discrete.hpp"
#include "survcl/survival/statistics.hpp"
#include "survcl/synth/generator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace survcl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

model::BackboneConfig small_backbone(const TaskStream& s) {
  model::BackboneConfig c;
  c.patch_dim = s.patch_dim();
  c.genomic_width = s.genomic_width();
  c.latent = 8;
  c.hidden = 16;
  c.attention_hidden = 4;
  c.n_bins = 4;
  c.seed = 5;
  return c;
}

fcr::ReplayItem stored_item(const model::Backbone& net, const CaseRecord& c, int task) {
  fcr::ReplayItem item;
  item.patches = c.patches;
  item.genomics = c.genomics;
  item.label = c.label;
  item.censor = c.censor;
  item.task = task;
  const auto pass = net.forward(c.patches, c.genomics, task);
  item.features = pass.features();
  item.logits = pass.logits.to_vector();
  return item;
}

Outcome gradient_fidelity() {
  const auto start = Clock::now();
  synth::GeneratorConfig g;
  g.n_tasks = 2;
  g.cases_per_task = 20;
  g.min_patches = 3;
  g.max_patches = 6;
  g.seed = 3;
  const auto s = synth::generate_stream(g).stream;
  model::Backbone net(small_backbone(s));
  net.add_task(0);
  const auto a = stored_item(net, s.tasks[0].cases[0], 0);
  const auto b = stored_item(net, s.tasks[0].cases[1], 0);
  net.freeze_task(0);
  net.add_task(1);
  // Move every stage away from the stored features.
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd(0.0, 0.05);
  net.visit([&](const std::string&, ad::Tensor& t) {
    for (Eigen::Index i = 0; i < t.mutable_value().size(); ++i) t.mutable_value().data()[i] += nd(rng);
  });
  const std::vector<const fcr::ReplayItem*> replay = {&a, &b};
  const auto& c1 = s.tasks[1].cases[0];
  const auto& c2 = s.tasks[1].cases[1];
  const fcr::CLLossConfig weights;
  const survival::SurvLossConfig surv;
  auto params = net.parameters();
  auto loss = [&] {
    const auto current =
        (survival::nll_survival_loss(net.forward(c1.patches, c1.genomics, 1).hazards, c1.label,
                                     c1.censor, surv) +
         survival::nll_survival_loss(net.forward(c2.patches, c2.genomics, 1).hazards, c2.label,
                                     c2.censor, surv)) * 0.5;
    const auto terms = fcr::replay_terms(net, replay, surv);
    return fcr::total_loss(current, terms.feature, terms.replay, weights);
  };
  const auto report = ad::finite_diff_report(params, loss, 1e-6);
  const double elapsed = seconds_since(start);
  return {report.max_error < 1e-4 && elapsed < 30.0,
          fmt("max relative error %.3g over %zu coordinates, %.1f s", report.max_error,
              report.checked, elapsed)};
}

Outcome survival_oracles() {
  using namespace survival;
  std::mt19937_64 rng(25);
  bool exact = true;
  double ipcw_err = 0.0, rank_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = oracle::random_sample(rng, 100, 0.3);
    exact = exact && c_index(s.risks, s.times, s.censor) ==
                         oracle::brute_c_index(s.risks, s.times, s.censor);
    const double tau = default_ipcw_tau(s.times, s.censor);
    ipcw_err = std::max(ipcw_err, std::abs(c_index_ipcw(s.risks, s.times, s.censor, tau) -
                                           oracle::brute_uno(s.risks, s.times, s.censor, tau)));
    const auto other = oracle::random_sample(rng, 60, 0.3);
    std::vector<int> ea, eb;
    for (int c : s.censor) ea.push_back(1 - c);
    for (int c : other.censor) eb.push_back(1 - c);
    rank_err = std::max(rank_err, std::abs(log_rank_test(s.times, ea, other.times, eb).chi2 -
                                           oracle::brute_log_rank(s.times, ea, other.times, eb).chi2));
  }
  const auto km = km_estimator(std::vector<double>{1, 2, 3}, std::vector<int>{1, 0, 1});
  const bool km_ok = km.size() == 2 && std::abs(km[0].survival - 2.0 / 3.0) < 1e-15 &&
                     km[1].survival == 0.0 && km[1].at_risk == 1;
  const auto km_all = km_estimator(std::vector<double>{1, 2, 3}, std::vector<int>{1, 1, 1});
  const bool km_all_ok = km_all.size() == 3 && std::abs(km_all[1].survival - 1.0 / 3.0) < 1e-15;
  const double sf = chi2_sf(3.841, 1);
  const bool pass = exact && ipcw_err < 1e-9 && km_ok && km_all_ok && rank_err < 1e-9 &&
                    std::abs(sf - 0.05) < 1e-3;
  return {pass, fmt("c_index exact %s, ipcw err %.2g, KM hand cases %s, log-rank err %.2g, "
                    "chi2_sf(3.841) = %.5f",
                    exact ? "yes" : "no", ipcw_err, km_ok && km_all_ok ? "ok" : "wrong", rank_err, sf)};
}

Outcome routing_invariants() {
  const std::size_t n = 10000;
  const model::MoEConfig cfg{.n_experts = 8, .k_top = 2};
  model::MoEModule moe(16, 16, 16, cfg, model::IntegrationMode::kAppend, 4);
  moe.add_task_router(0);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd(0.0, 2.0);
  bool support_ok = true, weights_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(16);
    for (auto& v : x) v = nd(rng);
    model::GatingResult g;
    moe.forward(ad::Tensor::vector(x), 0, &g);
    support_ok = support_ok && g.selected.size() == 3 && g.selected.back() == moe.shared_index();
    double total = 0.0;
    for (std::size_t e = 0; e < 8; ++e) {
      const bool on = std::find(g.selected.begin(), g.selected.end(), e) != g.selected.end();
      weights_ok = weights_ok && g.weights[e] >= 0.0 && (on || g.weights[e] == 0.0);
      total += g.weights[e];
    }
    weights_ok = weights_ok && std::abs(total - 1.0) < 1e-12;
  }
  std::vector<double> counts(8, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> logits(8);
    for (auto& v : logits) v = u(rng);
    for (std::size_t e : model::topk_s_select(logits, 2, 7).selected) counts[e] += 1.0;
  }
  const double p = 2.0 / 7.0;
  const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  double worst = 0.0;
  for (std::size_t e = 0; e < 7; ++e) {
    worst = std::max(worst, std::abs(counts[e] / static_cast<double>(n) - p) / sigma);
  }
  return {support_ok && weights_ok && worst <= 3.0 && counts[7] == static_cast<double>(n),
          fmt("support %s, weights %s, largest deviation from 2/7 = %.2f sigma",
              support_ok ? "ok" : "wrong", weights_ok ? "ok" : "wrong", worst)};
}

Outcome integration_reductions() {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> nd;
  model::MoEModule append(16, 16, 16, {}, model::IntegrationMode::kAppend, 6);
  append.add_task_router(0);
  model::MoEModule replace(32, 48, 16, {}, model::IntegrationMode::kReplace, 6);
  const std::vector<std::size_t> shared = {replace.shared_index()};
  std::vector<double> one_hot(8, 0.0);
  one_hot[replace.shared_index()] = 1.0;
  bool identity = true, reduces = true;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(16), z(32);
    for (auto& v : x) v = nd(rng);
    for (auto& v : z) v = nd(rng);
    const auto xt = ad::Tensor::vector(x);
    identity = identity && append.forward(xt, 0).to_vector() == x;
    const auto zt = ad::Tensor::vector(z);
    reduces = reduces && replace.combine(zt, ad::Tensor::vector(one_hot), shared).to_vector() ==
                             replace.expert(replace.shared_index())(zt).to_vector();
  }
  return {identity && reduces, fmt("append identity %s, replace reduces to shared expert %s",
                                   identity ? "exact" : "broken", reduces ? "exact" : "broken")};
}

Outcome reservoir_property() {
  const auto start = Clock::now();
  const std::size_t capacity = 32, n = 1000, trials = 2000;
  std::vector<double> held(n, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    fcr::ReplayBuffer buffer(capacity);
    fcr::Rng rng(t);
    for (std::size_t i = 0; i < n; ++i) {
      if (auto slot = buffer.reserve_slot(rng)) {
        fcr::ReplayItem item;
        item.task = static_cast<int>(i);
        buffer.store(*slot, std::move(item));
      }
    }
    for (const auto& item : buffer.items()) held[static_cast<std::size_t>(item.task)] += 1.0;
  }
  const double p = static_cast<double>(capacity) / n;
  const double sigma = std::sqrt(p * (1.0 - p) / trials);
  std::size_t outside = 0;
  double worst = 0.0;
  for (double h : held) {
    const double z = std::abs(h / trials - p) / sigma;
    worst = std::max(worst, z);
    if (z > 3.0) ++outside;
  }
  const double elapsed = seconds_since(start);
  // With 1000 items, about 2.7 are expected beyond 3 sigma by chance.
  const bool pass = outside <= n / 100 && worst < 5.0 && elapsed < 60.0;
  return {pass, fmt("%zu of %zu items beyond 3 sigma (at most %zu allowed), largest %.2f sigma, "
                    "%.1f s",
                    outside, n, n / 100, worst, elapsed)};
}

bool same_run(const harness::SequenceResult& a, const harness::SequenceResult& b) {
  if (a.curves.size() != b.curves.size()) return false;
  for (std::size_t i = 0; i < a.curves.size(); ++i) {
    if (a.curves[i].train_loss != b.curves[i].train_loss ||
        a.curves[i].validation_c_index != b.curves[i].validation_c_index) {
      return false;
    }
  }
  return a.model->snapshot() == b.model->snapshot();
}

Outcome reduction_chain() {
  synth::GeneratorConfig g;
  g.n_tasks = 2;
  g.cases_per_task = 100;
  g.seed = 4;
  const auto stream = synth::generate_stream(g).stream;
  harness::MethodConfig base;
  base.epochs = 2;
  base.seed = 4;
  base.ms_moe = true;
  auto finetune = base;
  finetune.method = harness::Method::kFinetune;
  auto consurv = base;
  consurv.method = harness::Method::kConSurv;
  consurv.loss.alpha = 0.0;
  consurv.loss.beta = 0.0;
  auto er = base;
  er.method = harness::Method::kEr;
  er.loss.beta = 0.0;
  const auto rf = harness::run_sequence(finetune, stream);
  const auto rc = harness::run_sequence(consurv, stream);
  const auto re = harness::run_sequence(er, stream);
  const bool a = same_run(rf, rc), b = same_run(rf, re);
  return {a && b, fmt("consurv(0,0) vs finetune %s, er(0) vs finetune %s",
                      a ? "identical" : "differ", b ? "identical" : "differ")};
}

Outcome cl_ordering() {
  const auto start = Clock::now();
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<double> ft_avg, cs_avg, ft_forget, cs_forget, ft_gap, cs_gap;
  // post-training diagonal minus the untrained baseline, averaged over tasks
  auto diagonal_gap = [](const harness::PerformanceMatrix& r) {
    double gap = 0.0;
    for (std::size_t c = 0; c < r.n_tasks(); ++c) gap += r.at(c + 1, c) - r.at(0, c);
    return gap / static_cast<double>(r.n_tasks());
  };
  for (auto seed : seeds) {
    synth::GeneratorConfig g;
    g.seed = seed;
    const auto stream = synth::generate_stream(g).stream;
    for (auto method : {harness::Method::kFinetune, harness::Method::kConSurv}) {
      harness::MethodConfig cfg;
      cfg.method = method;
      cfg.seed = seed;
      const auto r = harness::run_sequence(cfg, stream);
      const bool ft = method == harness::Method::kFinetune;
      (ft ? ft_avg : cs_avg).push_back(harness::average_performance(r.c_index));
      (ft ? ft_forget : cs_forget).push_back(harness::forgetting(r.c_index));
      (ft ? ft_gap : cs_gap).push_back(diagonal_gap(r.c_index));
      std::fprintf(stderr, "  seed %llu %-8s average %.4f forgetting %.4f diagonal gap %.4f\n",
                   static_cast<unsigned long long>(seed), harness::method_name(method),
                   (ft ? ft_avg : cs_avg).back(), (ft ? ft_forget : cs_forget).back(),
                   (ft ? ft_gap : cs_gap).back());
    }
  }
  const double elapsed = seconds_since(start);
  const double fa = median(ft_avg), ca = median(cs_avg);
  const double ff = median(ft_forget), cf = median(cs_forget);
  const double fg = median(ft_gap), cg = median(cs_gap);
  const bool a = ca >= fa, b = cf <= ff, c = ff > 0.02, d = fg > 0.0 && cg > 0.0;
  return {a && b && c && d && elapsed < 600.0,
          fmt("medians over %zu seeds: (a) average %.4f vs %.4f %s; (b) forgetting %.4f vs %.4f "
              "%s; (c) finetune forgetting %.4f %s; (d) diagonal over baseline %.4f / %.4f %s; "
              "%.0f s",
              seeds.size(), ca, fa, a ? "ok" : "FAIL", cf, ff, b ? "ok" : "FAIL", ff,
              c ? "ok" : "FAIL", cg, fg, d ? "ok" : "FAIL", elapsed)};
}

Outcome km_stratification() {
  const fs::path dir = fs::temp_directory_path() / "survcl_acceptance_km";
  fs::create_directories(dir);
  int significant = 0;
  std::string ps;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    synth::GeneratorConfig g;
    g.n_tasks = 1;
    g.shared_scale = 3.0;
    g.seed = seed;
    const auto stream = synth::generate_stream(g).stream;
    harness::MethodConfig cfg;
    cfg.method = harness::Method::kConSurv;
    cfg.seed = seed;
    const auto r = harness::run_sequence(cfg, stream);
    const auto report =
        io::emit_km_csv(*r.model, stream.tasks[0], r.splits[0].validation,
                        (dir / ("km_seed" + std::to_string(seed) + ".csv")).string());
    significant += report.significant ? 1 : 0;
    ps += fmt("%s%.2g", ps.empty() ? "" : ", ", report.test.p_value);
  }
  fs::remove_all(dir);
  return {significant >= 4, fmt("%d of 5 seeds significant (p = %s)", significant, ps.c_str())};
}

Outcome loss_cases() {
  using survival::nll_survival_loss;
  const std::vector<double> h = {0.5, 0.5};
  const double e1 = std::abs(nll_survival_loss(h, 0, 0, {}) - std::log(2.0));
  const double e2 = std::abs(nll_survival_loss(h, 0, 1, {.alpha_s = 1.0}));
  const double e3 = std::abs(nll_survival_loss(h, 0, 1, {.alpha_s = 0.0}) - std::log(2.0));
  fcr::CLLossConfig cfg;
  cfg.alpha = 0.5;
  cfg.beta = 0.25;
  const bool total = fcr::total_loss(1.0, 2.0, 4.0, cfg) == 3.0 &&
                     fcr::total_loss(ad::Tensor::scalar(1.0), ad::Tensor::scalar(2.0),
                                     ad::Tensor::scalar(4.0), cfg).item() == 3.0;
  cfg.alpha = cfg.beta = 0.0;
  const bool zero = fcr::total_loss(0.7, 5.0, 5.0, cfg) == 0.7;
  const double worst = std::max({e1, e2, e3});
  return {worst < 1e-9 && total && zero,
          fmt("survival loss hand cases max error %.2g, total loss arithmetic %s", worst,
              total && zero ? "exact" : "wrong")};
}

Outcome round_trip() {
  const fs::path dir = fs::temp_directory_path() / "survcl_acceptance_roundtrip";
  fs::remove_all(dir);
  synth::GeneratorConfig g;
  g.seed = 17;
  const auto stream = synth::generate_stream(g).stream;
  io::write_stream(stream, dir.string());
  const auto back = io::ingest_feature_bags(dir.string());
  fs::remove_all(dir);
  bool features = back.size() == stream.size(), bins = features;
  std::size_t cases = 0;
  for (std::size_t t = 0; features && t < stream.size(); ++t) {
    const auto& a = stream.tasks[t];
    const auto& b = back.tasks[t];
    bins = bins && a.bins == b.bins;
    features = features && a.cases.size() == b.cases.size();
    for (std::size_t i = 0; features && i < a.cases.size(); ++i, ++cases) {
      const auto& x = a.cases[i];
      const auto& y = b.cases[i];
      features = x.id == y.id && x.time == y.time && x.censor == y.censor && x.label == y.label &&
                 x.patches.features == y.patches.features &&
                 x.genomics.groups == y.genomics.groups;
    }
  }
  return {features && bins, fmt("%zu cases, features %s, bins %s", cases,
                                features ? "bit-identical" : "differ", bins ? "equal" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient fidelity", gradient_fidelity},
      {"survival metric oracles", survival_oracles},
      {"routing invariants", routing_invariants},
      {"integration-mode reductions", integration_reductions},
      {"reservoir property", reservoir_property},
      {"reduction chain", reduction_chain},
      {"continual-learning ordering", cl_ordering},
      {"KM stratification", km_stratification},
      {"loss formula cases", loss_cases},
      {"round-trip ingestion", round_trip},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
              criteria.size());
  return failed == 0 ? 0 : 1;
}
