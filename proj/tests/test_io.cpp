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
#include "survcl/harness/trainer.hpp"
#include "survcl/io/checkpoint.hpp"
#include "survcl/io/config.hpp"
#include "survcl/io/experiment.hpp"
#include "survcl/io/feature_bag.hpp"
#include "survcl/io/report.hpp"
#include "survcl/synth/generator.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace survcl;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Fresh scratch directory, removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("survcl_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& leaf = "") const { return (path / leaf).string(); }
};

synth::GeneratorConfig small_generator() {
  synth::GeneratorConfig g;
  g.n_tasks = 2;
  g.cases_per_task = 30;
  g.min_patches = 3;
  g.max_patches = 5;
  g.patch_dim = 6;
  g.genomic_dims = {3, 4, 3, 4, 3, 4};
  g.latent_dim = 2;
  g.seed = 21;
  return g;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

json small_config_json(const std::string& out) {
  auto gen = io::to_json(small_generator());
  return {{"synthetic", gen},
          {"methods", {"finetune"}},
          {"seeds", {1}},
          {"output_dir", out},
          {"training", {{"epochs", 1}}},
          {"architecture", {{"latent", 8}, {"hidden", 16}, {"attention_hidden", 4}}},
          {"workers", 1}};
}

void check_streams_equal(const TaskStream& a, const TaskStream& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    const auto& ta = a.tasks[t];
    const auto& tb = b.tasks[t];
    CHECK(ta.name == tb.name);
    CHECK(ta.task == tb.task);
    CHECK(ta.bins == tb.bins);
    CHECK(ta.genomic_dims == tb.genomic_dims);
    REQUIRE(ta.cases.size() == tb.cases.size());
    for (std::size_t i = 0; i < ta.cases.size(); ++i) {
      const auto& x = ta.cases[i];
      const auto& y = tb.cases[i];
      CHECK(x.id == y.id);
      CHECK(x.time == y.time);
      CHECK(x.censor == y.censor);
      CHECK(x.label == y.label);
      CHECK(x.patches.features == y.patches.features);
      CHECK(x.genomics.groups == y.genomics.groups);
    }
  }
}

}  // namespace

TEST_CASE("feature bag round trip is lossless") {
  TempDir dir("roundtrip");
  const auto stream = synth::generate_stream(small_generator()).stream;
  io::write_stream(stream, dir.str());
  CHECK(fs::exists(dir.path / io::kManifestName));
  check_streams_equal(stream, io::ingest_feature_bags(dir.str()));
}

TEST_CASE("feature bag corruption is diagnosed") {
  TempDir dir("corrupt");
  const auto stream = synth::generate_stream(small_generator()).stream;
  io::write_stream(stream, dir.str());
  const auto file = dir.str("task0.fbag");
  REQUIRE(fs::exists(file));

  SUBCASE("truncated file") {
    fs::resize_file(file, fs::file_size(file) / 2);
    try {
      io::ingest_feature_bags(dir.str());
      FAIL("no error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("task0.fbag") != std::string::npos);
    }
  }
  SUBCASE("truncated header") {
    fs::resize_file(file, 10);
    CHECK_THROWS_AS(io::ingest_feature_bags(dir.str()), DataError);
  }
  SUBCASE("bad magic") {
    std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
    f.close();
    CHECK_THROWS_WITH_AS(io::read_task_file(file, "task0"), doctest::Contains("magic"), DataError);
  }
  SUBCASE("trailing bytes") {
    std::ofstream f(file, std::ios::app | std::ios::binary);
    f.put('\0');
    f.close();
    CHECK_THROWS_AS(io::read_task_file(file, "task0"), DataError);
  }
  SUBCASE("missing manifest entry") {
    fs::remove(file);
    CHECK_THROWS_AS(io::ingest_feature_bags(dir.str()), DataError);
  }
  SUBCASE("missing manifest") {
    fs::remove(dir.path / io::kManifestName);
    CHECK_THROWS_AS(io::ingest_feature_bags(dir.str()), DataError);
  }
}

TEST_CASE("genomic groups are padded to the widest group across tasks") {
  TempDir dir("padding");
  auto g = small_generator();
  g.n_tasks = 1;
  g.genomic_dims = {10, 4, 10, 6, 3, 10};
  auto narrow = synth::generate_stream(g).stream;
  g.genomic_dims = {14, 4, 10, 6, 3, 14};
  g.seed = 22;
  auto wide = synth::generate_stream(g).stream;
  TaskStream both;
  both.tasks.push_back(narrow.tasks[0]);
  both.tasks.push_back(wide.tasks[0]);
  both.tasks[1].task = 1;
  both.tasks[1].name = "task1";
  for (auto& c : both.tasks[1].cases) {
    c.task = 1;
    c.id = "wide_" + c.id;
  }
  io::write_stream(both, dir.str());
  const auto loaded = io::ingest_feature_bags(dir.str());
  REQUIRE(loaded.size() == 2);
  CHECK(loaded.genomic_width() == 14);
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t i = 0; i < loaded.tasks[t].cases.size(); ++i) {
      const auto& got = loaded.tasks[t].cases[i].genomics.groups;
      const auto& orig = both.tasks[t].cases[i].genomics.groups;
      REQUIRE(got.cols() == 14);
      CHECK(got.leftCols(orig.cols()) == orig);
      CHECK(got.rightCols(14 - orig.cols()).isZero(0.0));
    }
  }
}

TEST_CASE("config parsing") {
  const auto base = small_config_json("out");
  const auto cfg = io::parse_config(base);
  CHECK(cfg.methods == std::vector<harness::Method>{harness::Method::kFinetune});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1});
  CHECK(cfg.training.epochs == 1);
  CHECK(cfg.training.architecture.latent == 8);
  CHECK(cfg.training.optimizer.learning_rate == 2e-4);
  REQUIRE(cfg.source.synthetic.has_value());
  CHECK(cfg.source.synthetic->cases_per_task == 30);

  auto expect_error = [&](auto edit) {
    json j = base;
    edit(j);
    CHECK_THROWS_AS(io::parse_config(j), ConfigError);
  };
  expect_error([](json& j) { j["training"]["alpah"] = 0.1; });
  expect_error([](json& j) { j["colour"] = 1; });
  expect_error([](json& j) { j["methods"] = json::array(); });
  expect_error([](json& j) { j["seeds"] = json::array(); });
  expect_error([](json& j) { j["methods"] = {"lwf"}; });
  expect_error([](json& j) { j["data_dir"] = "somewhere"; });
  expect_error([](json& j) { j.erase("synthetic"); });
  expect_error([](json& j) { j["training"]["epochs"] = "many"; });
  expect_error([](json& j) { j["training"]["alpha"] = -1.0; });
  expect_error([](json& j) { j.erase("output_dir"); });
  CHECK_THROWS_AS(io::load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("stream source seeding") {
  io::StreamSource src;
  src.synthetic = small_generator();
  const auto a = io::build_stream(src, 1);
  const auto b = io::build_stream(src, 2);
  CHECK(a.tasks[0].cases[0].time != b.tasks[0].cases[0].time);
  src.fixed_generator_seed = true;
  const auto c = io::build_stream(src, 1);
  const auto d = io::build_stream(src, 2);
  CHECK(c.tasks[0].cases[0].time == d.tasks[0].cases[0].time);
  const auto back = io::source_from_json(io::to_json(src));
  CHECK(back.fixed_generator_seed);
  CHECK(io::to_json(*back.synthetic) == io::to_json(*src.synthetic));
}

TEST_CASE("checkpoint round trip") {
  TempDir dir("checkpoint");
  const auto stream = synth::generate_stream(small_generator()).stream;
  harness::MethodConfig cfg;
  cfg.architecture.latent = 4;
  cfg.architecture.hidden = 6;
  cfg.architecture.attention_hidden = 3;
  model::Backbone net(harness::backbone_config(cfg, stream));
  net.add_task(0);
  net.add_task(1);
  net.freeze_task(0);
  const auto path = dir.str("ck.bin");
  io::save_checkpoint(path, net, {{"method", "consurv"}, {"seed", 4}});
  auto loaded = io::load_checkpoint(path);
  CHECK(loaded.meta.at("seed") == 4);
  CHECK(loaded.model.tasks() == net.tasks());
  CHECK(loaded.model.task_frozen(0));
  CHECK_FALSE(loaded.model.task_frozen(1));
  CHECK(loaded.model.snapshot() == net.snapshot());
  const auto& c = stream.tasks[1].cases[0];
  CHECK(loaded.model.forward(c.patches, c.genomics, 1).hazards.to_vector() ==
        net.forward(c.patches, c.genomics, 1).hazards.to_vector());

  fs::resize_file(path, fs::file_size(path) - 3);
  CHECK_THROWS_AS(io::load_checkpoint(path), DataError);
}

TEST_CASE("KM split and CSV") {
  TempDir dir("km");
  const std::vector<double> risks = {0.9, 0.8, 0.1, 0.2, 0.7, 0.3, 0.75, 0.15};
  const std::vector<double> times = {1, 2, 8, 9, 2, 7, 3, 9};
  const std::vector<int> censor = {0, 0, 0, 1, 0, 0, 1, 0};
  const auto r = io::km_split(risks, times, censor);
  std::set<double> low_events, high_events;
  double mean = 0.0;
  for (double x : risks) mean += x / static_cast<double>(risks.size());
  for (std::size_t i = 0; i < risks.size(); ++i) {
    if (censor[i] == 0) (risks[i] > mean ? high_events : low_events).insert(times[i]);
  }
  CHECK(r.low.size() == low_events.size());
  CHECK(r.high.size() == high_events.size());
  CHECK(r.test.chi2 > 0.0);
  CHECK(r.significant == (r.test.p_value < 0.05));

  const auto path = dir.str("km.csv");
  io::write_km_csv(r, path);
  const auto lines = read_lines(path);
  CHECK(lines.size() == 1 + low_events.size() + high_events.size());
  CHECK(lines[0] == "group,time,survival,at_risk,events,chi2,p_value,significant");

  const std::vector<double> flat(8, 0.4);
  CHECK_THROWS_WITH_AS(io::km_split(flat, times, censor), doctest::Contains("degenerate"),
                       DataError);
}

TEST_CASE("strong signal separates the true-risk split") {
  auto g = small_generator();
  g.n_tasks = 1;
  g.cases_per_task = 200;
  g.shared_scale = 3.0;
  const auto s = synth::generate_stream(g);
  std::vector<double> risk;
  for (const auto& o : s.oracle[0]) risk.push_back(o.log_risk);
  const auto r = io::km_split(risk, s.stream.tasks[0].times(), s.stream.tasks[0].censor());
  CHECK(r.test.p_value < 0.05);
  CHECK(r.significant);
}

TEST_CASE("metric reports") {
  harness::SequenceResult one;
  one.c_index = harness::PerformanceMatrix(1, harness::Metric::kCIndex);
  one.c_index_ipcw = harness::PerformanceMatrix(1, harness::Metric::kCIndexIpcw);
  one.c_index.set(0, 0, 0.5);
  one.c_index.set(1, 0, 0.7);
  one.c_index_ipcw.set(0, 0, 0.5);
  one.c_index_ipcw.set(1, 0, 0.68);
  const auto j = io::metrics_json(one, harness::Method::kConSurv, 3);
  CHECK(j.at("method") == "consurv");
  CHECK(j.at("c_index").at("average") == 0.7);
  CHECK_FALSE(j.at("c_index").contains("forget"));
  CHECK_FALSE(j.at("c_index").contains("bwt"));
  CHECK_FALSE(j.at("c_index").contains("fwt"));

  json a = {{"method", "er"}, {"seed", 1}, {"c_index", {{"average", 0.6}, {"forget", 0.1}}},
            {"c_index_ipcw", {{"average", 0.5}}}};
  json b = {{"method", "er"}, {"seed", 2}, {"c_index", {{"average", 0.8}, {"forget", 0.3}}},
            {"c_index_ipcw", {{"average", 0.5}}}};
  const std::vector<json> runs = {a, b};
  const auto agg = io::aggregate_json(runs);
  const auto& avg = agg.at("er").at("c_index").at("average");
  CHECK(std::abs(avg.at("mean").get<double>() - 0.7) < 1e-15);
  CHECK(std::abs(avg.at("std").get<double>() - std::sqrt(0.02)) < 1e-15);
  CHECK(avg.at("n") == 2);
  CHECK(agg.at("er").at("c_index_ipcw").at("average").at("std") == 0.0);
  const std::vector<json> single = {a};
  CHECK_FALSE(io::aggregate_json(single).at("er").at("c_index").at("average").contains("std"));
}

TEST_CASE("matrix CSV leaves missing entries blank") {
  TempDir dir("matrix");
  harness::PerformanceMatrix r(2, harness::Metric::kCIndex);
  r.set(0, 0, 0.5);
  r.set(0, 1, 0.25);
  r.set(2, 0, 0.75);
  r.set(2, 1, 1.0);
  io::write_matrix_csv(r, dir.str("m.csv"));
  const auto lines = read_lines(dir.str("m.csv"));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "row,task1,task2");
  CHECK(lines[1] == "0,0.5,0.25");
  CHECK(lines[2] == "1,,");
  CHECK(lines[3] == "2,0.75,1");
}

TEST_CASE("exit codes") {
  auto code = [](auto e) { return io::exit_code_for(std::make_exception_ptr(e)); };
  CHECK(code(ConfigError("x")) == io::kExitConfig);
  CHECK(code(DataError("x")) == io::kExitData);
  CHECK(code(DimensionError("x")) == io::kExitData);
  CHECK(code(UndefinedMetricError("x")) == io::kExitUndefinedMetric);
  CHECK(code(std::runtime_error("x")) == io::kExitInternal);
}

TEST_CASE("minimal experiment run") {
  TempDir dir("experiment");
  auto j = small_config_json(dir.str("configured"));
  j["synthetic"]["n_tasks"] = 1;
  auto cfg = io::parse_config(j);
  CHECK(io::resolve_output_dir(cfg) == dir.str("configured"));

  const auto outcome = io::run_experiment(cfg);
  CHECK(outcome.exit_code == io::kExitOk);
  REQUIRE(outcome.runs.size() == 1);
  const fs::path run = dir.path / "configured" / "finetune" / "seed_1";
  for (const char* f : {"metrics.json", "performance_c_index.csv", "performance_c_index_ipcw.csv",
                        "routing.csv", "curves.csv", "km_task0.csv", "checkpoint.bin"}) {
    CHECK_MESSAGE(fs::exists(run / f), f);
  }
  std::ifstream in(run / "metrics.json");
  const auto metrics = json::parse(in);
  CHECK(metrics.at("c_index").contains("average"));
  CHECK_FALSE(metrics.at("c_index").contains("forget"));
  CHECK(fs::exists(dir.path / "configured" / "aggregate.json"));

  SUBCASE("two seeds and the output override") {
    cfg.seeds = {1, 2};
    setenv(io::kOutputRootEnv, dir.str("override").c_str(), 1);
    CHECK(io::resolve_output_dir(cfg) == dir.str("override"));
    const auto two = io::run_experiment(cfg);
    unsetenv(io::kOutputRootEnv);
    CHECK(two.exit_code == io::kExitOk);
    std::ifstream agg_in(dir.path / "override" / "aggregate.json");
    const auto agg = json::parse(agg_in);
    CHECK(agg.at("finetune").at("c_index").at("average").contains("std"));
    CHECK(agg.at("finetune").at("seeds").size() == 2);
  }
  SUBCASE("a failing run gives a nonzero exit code and no aggregate") {
    io::ExperimentConfig broken = cfg;
    broken.source = {};
    broken.source.data_dir = dir.str("missing");
    broken.output_dir = dir.str("broken");
    const auto bad = io::run_experiment(broken);
    CHECK(bad.exit_code == io::kExitData);
    CHECK_FALSE(bad.runs[0].error.empty());
    CHECK_FALSE(fs::exists(dir.path / "broken" / "aggregate.json"));
  }
}
