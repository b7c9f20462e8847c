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

#include "survcl/harness/trainer.hpp"
#include "survcl/synth/generator.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace survcl::io {

/// Where a run's task stream comes from: the generator (seeded by the run
/// seed unless the config fixes one) or a directory of feature-bag files.
struct StreamSource {
  std::optional<synth::GeneratorConfig> synthetic;
  bool fixed_generator_seed = false;
  std::optional<std::string> data_dir;
};

struct ExperimentConfig {
  StreamSource source;
  std::vector<harness::Method> methods;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  /// Shared training settings; method and seed vary per run.
  harness::MethodConfig training;
  /// Parallel runs; 0 uses every hardware thread.
  std::size_t workers = 0;
};

/// Parses a JSON experiment description. Unknown keys, missing required
/// keys and ill-typed values raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

nlohmann::json to_json(const synth::GeneratorConfig& cfg);
synth::GeneratorConfig generator_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StreamSource& source);
StreamSource source_from_json(const nlohmann::json& j);

/// Stream for one run seed.
TaskStream build_stream(const StreamSource& source, std::uint64_t seed);

}  // namespace survcl::io
