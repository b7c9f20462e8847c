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
#include "survcl/io/checkpoint.hpp"
#include "survcl/io/config.hpp"
#include "survcl/io/experiment.hpp"
#include "survcl/io/feature_bag.hpp"
#include "survcl/io/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>

namespace {

using namespace survcl;

struct CheckpointContext {
  model::Backbone model;
  TaskStream stream;
  std::vector<harness::SplitIndices> splits;
};

CheckpointContext open_checkpoint(const std::string& path) {
  auto loaded = io::load_checkpoint(path);
  const auto& meta = loaded.meta;
  io::StreamSource source;
  harness::MethodConfig mc;
  try {
    source = io::source_from_json(meta.at("source"));
    mc.seed = meta.at("seed").get<std::uint64_t>();
    mc.n_folds = meta.at("n_folds").get<std::size_t>();
    mc.fold = meta.at("fold").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": checkpoint header lacks run information: " + e.what());
  }
  auto stream = io::build_stream(source, mc.seed);
  auto splits = harness::make_splits(stream, mc);
  return {std::move(loaded.model), std::move(stream), std::move(splits)};
}

std::size_t find_task(const TaskStream& stream, const std::string& key) {
  for (std::size_t j = 0; j < stream.size(); ++j) {
    if (stream.tasks[j].name == key || std::to_string(stream.tasks[j].task) == key) return j;
  }
  throw UnknownTaskError("no task named '" + key + "'");
}

int cmd_run(const std::string& config_path) {
  const auto cfg = io::load_config(config_path);
  const auto outcome = io::run_experiment(cfg);
  for (const auto& run : outcome.runs) {
    if (run.exit_code != io::kExitOk) continue;
    const auto& m = run.metrics.at("c_index");
    std::printf("%-8s seed %-4llu average c-index %.4f\n", harness::method_name(run.method),
                static_cast<unsigned long long>(run.seed), m.at("average").get<double>());
  }
  return outcome.exit_code;
}

int cmd_ingest_check(const std::string& dir) {
  const auto stream = io::ingest_feature_bags(dir);
  std::printf("%zu tasks, patch dim %zu, genomic width %zu\n", stream.size(), stream.patch_dim(),
              stream.genomic_width());
  for (const auto& t : stream.tasks) {
    std::size_t censored = 0;
    for (const auto& c : t.cases) censored += static_cast<std::size_t>(c.censor);
    std::printf("  %-16s id %-3d cases %-5zu censored %.3f bins", t.name.c_str(), t.task,
                t.cases.size(), static_cast<double>(censored) / static_cast<double>(t.cases.size()));
    for (double b : t.bins.boundaries) std::printf(" %.6g", b);
    std::printf("\n");
  }
  return io::kExitOk;
}

int cmd_km(const std::string& checkpoint, const std::string& task, const std::string& out) {
  const auto ctx = open_checkpoint(checkpoint);
  const std::size_t j = find_task(ctx.stream, task);
  const auto report = io::emit_km_csv(ctx.model, ctx.stream.tasks[j], ctx.splits[j].validation, out);
  std::printf("log-rank chi2 %.4f p %.4g%s\n", report.test.chi2, report.test.p_value,
              report.significant ? " (significant)" : "");
  return io::kExitOk;
}

int cmd_routing(const std::string& checkpoint, const std::string& task, const std::string& out) {
  const auto ctx = open_checkpoint(checkpoint);
  const std::size_t j = find_task(ctx.stream, task);
  if (!ctx.model.config().ms_moe) throw ConfigError("checkpoint was trained without MS-MoE");
  const auto records =
      harness::routing_proportions(ctx.model, ctx.stream.tasks[j], ctx.splits[j].validation);
  io::write_routing_csv(records, out);
  return io::kExitOk;
}

int cmd_generate(const std::string& dir, const std::string& config_path, std::uint64_t seed) {
  synth::GeneratorConfig g;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError(config_path + ": cannot open generator config");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(config_path + ": " + e.what());
    }
    g = io::generator_from_json(j);
  }
  g.seed = seed;
  io::write_stream(synth::generate_stream(g).stream, dir);
  std::printf("wrote %zu tasks to %s\n", g.n_tasks, dir.c_str());
  return io::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continual multimodal survival analysis experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run every method and seed of an experiment config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();

  std::string dir;
  auto* ingest = app.add_subcommand("ingest-check", "Validate a feature-bag directory");
  ingest->add_option("directory", dir, "Directory with manifest.json")->required();

  std::string checkpoint, task, out;
  auto* km = app.add_subcommand("km", "Kaplan-Meier risk split of a task's validation cases");
  km->add_option("checkpoint", checkpoint)->required();
  km->add_option("task", task, "Task name or id")->required();
  km->add_option("out", out, "Output CSV")->required();

  auto* routing = app.add_subcommand("routing", "Expert selection proportions for a task");
  routing->add_option("checkpoint", checkpoint)->required();
  routing->add_option("task", task, "Task name or id")->required();
  routing->add_option("out", out, "Output CSV")->required();

  std::string gen_config;
  std::uint64_t seed = 0;
  auto* generate = app.add_subcommand("generate", "Write a synthetic stream as feature bags");
  generate->add_option("directory", dir, "Output directory")->required();
  generate->add_option("--config", gen_config, "Generator settings (JSON)");
  generate->add_option("--seed", seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : io::kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*ingest) return cmd_ingest_check(dir);
    if (*km) return cmd_km(checkpoint, task, out);
    if (*routing) return cmd_routing(checkpoint, task, out);
    if (*generate) return cmd_generate(dir, gen_config, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return io::exit_code_for(std::current_exception());
  }
  return io::kExitOk;
}
