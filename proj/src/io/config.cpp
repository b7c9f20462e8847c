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

#include "survcl/io/config.hpp"

#include "survcl/error.hpp"
#include "survcl/io/feature_bag.hpp"

#include <fstream>
#include <set>

namespace survcl::io {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (keys.count(key) == 0) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

std::size_t read_count(const json& j, const char* key, std::size_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("'" + std::string(key) + "' in " + where + " must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

json to_json(const synth::GeneratorConfig& cfg) {
  return {{"n_tasks", cfg.n_tasks},
          {"cases_per_task", cfg.cases_per_task},
          {"min_patches", cfg.min_patches},
          {"max_patches", cfg.max_patches},
          {"patch_dim", cfg.patch_dim},
          {"genomic_dims", cfg.genomic_dims},
          {"latent_dim", cfg.latent_dim},
          {"signal_fraction", cfg.signal_fraction},
          {"signal_marker", cfg.signal_marker},
          {"feature_noise", cfg.feature_noise},
          {"shared_scale", cfg.shared_scale},
          {"specific_scale", cfg.specific_scale},
          {"cross_strength", cfg.cross_strength},
          {"task_shift", cfg.task_shift},
          {"censor_rate", cfg.censor_rate},
          {"baseline_hazard", cfg.baseline_hazard},
          {"baseline_spread", cfg.baseline_spread},
          {"n_bins", cfg.n_bins},
          {"seed", cfg.seed}};
}

synth::GeneratorConfig generator_from_json(const json& j) {
  const std::string where = "'synthetic'";
  check_keys(j, where,
             {"n_tasks", "cases_per_task", "min_patches", "max_patches", "patch_dim", "genomic_dims",
              "latent_dim", "signal_fraction", "signal_marker", "feature_noise", "shared_scale",
              "specific_scale", "cross_strength", "task_shift", "censor_rate", "baseline_hazard",
              "baseline_spread", "n_bins", "seed"});
  synth::GeneratorConfig cfg;
  cfg.n_tasks = read_count(j, "n_tasks", cfg.n_tasks, where);
  cfg.cases_per_task = read_count(j, "cases_per_task", cfg.cases_per_task, where);
  cfg.min_patches = read_count(j, "min_patches", cfg.min_patches, where);
  cfg.max_patches = read_count(j, "max_patches", cfg.max_patches, where);
  cfg.patch_dim = read_count(j, "patch_dim", cfg.patch_dim, where);
  cfg.latent_dim = read_count(j, "latent_dim", cfg.latent_dim, where);
  cfg.n_bins = read_count(j, "n_bins", cfg.n_bins, where);
  read(j, "genomic_dims", cfg.genomic_dims, where);
  read(j, "signal_fraction", cfg.signal_fraction, where);
  read(j, "signal_marker", cfg.signal_marker, where);
  read(j, "feature_noise", cfg.feature_noise, where);
  read(j, "shared_scale", cfg.shared_scale, where);
  read(j, "specific_scale", cfg.specific_scale, where);
  read(j, "cross_strength", cfg.cross_strength, where);
  read(j, "task_shift", cfg.task_shift, where);
  read(j, "censor_rate", cfg.censor_rate, where);
  read(j, "baseline_hazard", cfg.baseline_hazard, where);
  read(j, "baseline_spread", cfg.baseline_spread, where);
  read(j, "seed", cfg.seed, where);
  synth::validate(cfg);
  return cfg;
}

json to_json(const StreamSource& source) {
  if (source.data_dir) return {{"data_dir", *source.data_dir}};
  json g = to_json(*source.synthetic);
  if (!source.fixed_generator_seed) g.erase("seed");
  return {{"synthetic", g}};
}

StreamSource source_from_json(const json& j) {
  StreamSource s;
  const bool has_synth = j.contains("synthetic");
  const bool has_dir = j.contains("data_dir");
  if (has_synth == has_dir) throw ConfigError("exactly one of 'synthetic' and 'data_dir' is required");
  if (has_synth) {
    s.synthetic = generator_from_json(j.at("synthetic"));
    s.fixed_generator_seed = j.at("synthetic").contains("seed");
  } else {
    if (!j.at("data_dir").is_string()) throw ConfigError("'data_dir' must be a string");
    s.data_dir = j.at("data_dir").get<std::string>();
  }
  return s;
}

ExperimentConfig parse_config(const json& j) {
  check_keys(j, "config",
             {"synthetic", "data_dir", "methods", "seeds", "output_dir", "training", "architecture",
              "workers"});
  ExperimentConfig cfg;
  cfg.source = source_from_json(j);

  if (!j.contains("methods") || !j.at("methods").is_array() || j.at("methods").empty()) {
    throw ConfigError("'methods' must be a non-empty list");
  }
  for (const auto& m : j.at("methods")) {
    if (!m.is_string()) throw ConfigError("method names must be strings");
    cfg.methods.push_back(harness::parse_method(m.get<std::string>()));
  }
  if (!j.contains("seeds") || !j.at("seeds").is_array() || j.at("seeds").empty()) {
    throw ConfigError("'seeds' must be a non-empty list");
  }
  for (const auto& s : j.at("seeds")) {
    if (!s.is_number_integer() || s.get<long long>() < 0) {
      throw ConfigError("seeds must be nonnegative integers");
    }
    cfg.seeds.push_back(s.get<std::uint64_t>());
  }
  if (!j.contains("output_dir") || !j.at("output_dir").is_string()) {
    throw ConfigError("'output_dir' must be a string");
  }
  cfg.output_dir = j.at("output_dir").get<std::string>();
  cfg.workers = read_count(j, "workers", 0, "config");

  auto& t = cfg.training;
  if (j.contains("training")) {
    const auto& tj = j.at("training");
    const std::string where = "'training'";
    check_keys(tj, where,
               {"epochs", "learning_rate", "weight_decay", "beta1", "beta2", "eps", "alpha", "beta",
                "zeta", "replay_count", "alpha_s", "buffer_capacity", "n_folds", "fold", "ms_moe"});
    t.epochs = read_count(tj, "epochs", t.epochs, where);
    read(tj, "learning_rate", t.optimizer.learning_rate, where);
    read(tj, "weight_decay", t.optimizer.weight_decay, where);
    read(tj, "beta1", t.optimizer.beta1, where);
    read(tj, "beta2", t.optimizer.beta2, where);
    read(tj, "eps", t.optimizer.eps, where);
    read(tj, "alpha", t.loss.alpha, where);
    read(tj, "beta", t.loss.beta, where);
    read(tj, "zeta", t.loss.zeta, where);
    t.loss.replay_count = read_count(tj, "replay_count", t.loss.replay_count, where);
    read(tj, "alpha_s", t.survival.alpha_s, where);
    t.buffer_capacity = read_count(tj, "buffer_capacity", t.buffer_capacity, where);
    t.n_folds = read_count(tj, "n_folds", t.n_folds, where);
    t.fold = read_count(tj, "fold", t.fold, where);
    if (tj.contains("ms_moe")) {
      bool v = false;
      read(tj, "ms_moe", v, where);
      t.ms_moe = v;
    }
  }
  if (j.contains("architecture")) {
    const auto& aj = j.at("architecture");
    const std::string where = "'architecture'";
    check_keys(aj, where, {"latent", "hidden", "attention_hidden", "n_experts", "k_top"});
    auto& a = t.architecture;
    a.latent = read_count(aj, "latent", a.latent, where);
    a.hidden = read_count(aj, "hidden", a.hidden, where);
    a.attention_hidden = read_count(aj, "attention_hidden", a.attention_hidden, where);
    a.moe.n_experts = read_count(aj, "n_experts", a.moe.n_experts, where);
    a.moe.k_top = read_count(aj, "k_top", a.moe.k_top, where);
    if (a.latent == 0 || a.hidden == 0 || a.attention_hidden == 0) {
      throw ConfigError("layer widths must be positive");
    }
    if (a.moe.k_top + 1 > a.moe.n_experts) throw ConfigError("k_top + 1 must not exceed n_experts");
  }
  harness::validate(t);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

TaskStream build_stream(const StreamSource& source, std::uint64_t seed) {
  if (source.data_dir) return ingest_feature_bags(*source.data_dir);
  if (!source.synthetic) throw ConfigError("stream source is empty");
  auto g = *source.synthetic;
  if (!source.fixed_generator_seed) g.seed = seed;
  return synth::generate_stream(g).stream;
}

}  // namespace survcl::io
