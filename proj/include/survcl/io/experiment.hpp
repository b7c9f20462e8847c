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

#include "survcl/io/config.hpp"

#include <json.hpp>

#include <exception>
#include <string>
#include <vector>

namespace survcl::io {

inline constexpr const char* kOutputRootEnv = "SURVCL_OUTPUT_ROOT";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitData = 2,
  kExitUndefinedMetric = 3,
  kExitInternal = 4,
};

/// Exit code for an exception escaping a run.
int exit_code_for(std::exception_ptr error);

/// The configured output directory, or the environment override when set.
std::string resolve_output_dir(const ExperimentConfig& cfg);

struct RunOutcome {
  harness::Method method = harness::Method::kConSurv;
  std::uint64_t seed = 0;
  std::string directory;
  nlohmann::json metrics;
  int exit_code = kExitOk;
  std::string error;
};

struct ExperimentOutcome {
  std::vector<RunOutcome> runs;
  /// First failing run's code in run order, or kExitOk.
  int exit_code = kExitOk;
};

/// Trains one (method, seed) run and writes its reports into directory:
/// metrics.json, performance_c_index.csv, performance_c_index_ipcw.csv,
/// routing.csv, curves.csv, km_<task>.csv for every task and checkpoint.bin.
RunOutcome run_one(const ExperimentConfig& cfg, harness::Method method, std::uint64_t seed,
                   const std::string& directory);

/// Runs every (method, seed) pair on a pool of worker threads, then writes
/// aggregate.json when all runs succeeded.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

}  // namespace survcl::io
