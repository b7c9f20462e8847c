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

#include "survcl/io/experiment.hpp"

#include "survcl/error.hpp"
#include "survcl/io/checkpoint.hpp"
#include "survcl/io/report.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

namespace survcl::io {

namespace fs = std::filesystem;

int exit_code_for(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const ConfigError&) {
    return kExitConfig;
  } catch (const UndefinedMetricError&) {
    return kExitUndefinedMetric;
  } catch (const DataError&) {
    return kExitData;
  } catch (const DimensionError&) {
    return kExitData;
  } catch (const fs::filesystem_error&) {
    return kExitData;
  } catch (...) {
    return kExitInternal;
  }
}

std::string resolve_output_dir(const ExperimentConfig& cfg) {
  if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') {
    return root;
  }
  return cfg.output_dir;
}

RunOutcome run_one(const ExperimentConfig& cfg, harness::Method method, std::uint64_t seed,
                   const std::string& directory) {
  RunOutcome outcome;
  outcome.method = method;
  outcome.seed = seed;
  outcome.directory = directory;

  const TaskStream stream = build_stream(cfg.source, seed);
  harness::MethodConfig mc = cfg.training;
  mc.method = method;
  mc.seed = seed;
  auto result = harness::run_sequence(mc, stream);

  fs::create_directories(directory);
  const fs::path dir(directory);
  outcome.metrics = metrics_json(result, method, seed);
  write_json(outcome.metrics, (dir / "metrics.json").string());
  write_matrix_csv(result.c_index, (dir / "performance_c_index.csv").string());
  write_matrix_csv(result.c_index_ipcw, (dir / "performance_c_index_ipcw.csv").string());
  write_routing_csv(result.routing, (dir / "routing.csv").string());
  write_curves_csv(result.curves, (dir / "curves.csv").string());
  for (std::size_t j = 0; j < stream.size(); ++j) {
    emit_km_csv(*result.model, stream.tasks[j], result.splits[j].validation,
                (dir / ("km_" + stream.tasks[j].name + ".csv")).string());
  }
  const nlohmann::json meta = {{"method", harness::method_name(method)},
                               {"seed", seed},
                               {"n_folds", mc.n_folds},
                               {"fold", mc.fold},
                               {"source", to_json(cfg.source)}};
  save_checkpoint((dir / "checkpoint.bin").string(), *result.model, meta);
  return outcome;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  const std::string root = resolve_output_dir(cfg);
  struct Job {
    harness::Method method;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (auto m : cfg.methods) {
    for (auto s : cfg.seeds) jobs.push_back({m, s});
  }
  ExperimentOutcome outcome;
  outcome.runs.resize(jobs.size());

  std::size_t workers = cfg.workers != 0 ? cfg.workers : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      const std::string dir = (fs::path(root) / harness::method_name(job.method) /
                               ("seed_" + std::to_string(job.seed)))
                                  .string();
      RunOutcome& run = outcome.runs[i];
      try {
        run = run_one(cfg, job.method, job.seed, dir);
      } catch (const std::exception& e) {
        run.method = job.method;
        run.seed = job.seed;
        run.directory = dir;
        run.exit_code = exit_code_for(std::current_exception());
        run.error = e.what();
      }
      std::lock_guard lock(log_mutex);
      std::cerr << harness::method_name(job.method) << " seed " << job.seed << ": "
                << (run.exit_code == kExitOk ? "done" : "failed: " + run.error) << '\n';
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::vector<nlohmann::json> metrics;
  for (const auto& run : outcome.runs) {
    if (run.exit_code != kExitOk && outcome.exit_code == kExitOk) outcome.exit_code = run.exit_code;
    metrics.push_back(run.metrics);
  }
  if (outcome.exit_code == kExitOk) {
    fs::create_directories(root);
    write_json(aggregate_json(metrics), (fs::path(root) / "aggregate.json").string());
  }
  return outcome;
}

}  // namespace survcl::io
