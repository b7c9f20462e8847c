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

#include "survcl/io/checkpoint.hpp"

#include "survcl/error.hpp"
#include "survcl/io/binary.hpp"

#include <cstring>

namespace survcl::io {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'S', 'C', 'C', 'K'};
constexpr std::uint8_t kVersion = 1;

}  // namespace

json to_json(const model::BackboneConfig& cfg) {
  return {{"patch_dim", cfg.patch_dim},
          {"genomic_width", cfg.genomic_width},
          {"latent", cfg.latent},
          {"hidden", cfg.hidden},
          {"attention_hidden", cfg.attention_hidden},
          {"n_bins", cfg.n_bins},
          {"ms_moe", cfg.ms_moe},
          {"n_experts", cfg.moe.n_experts},
          {"k_top", cfg.moe.k_top},
          {"seed", cfg.seed}};
}

model::BackboneConfig backbone_config_from_json(const json& j) {
  model::BackboneConfig cfg;
  cfg.patch_dim = j.at("patch_dim").get<std::size_t>();
  cfg.genomic_width = j.at("genomic_width").get<std::size_t>();
  cfg.latent = j.at("latent").get<std::size_t>();
  cfg.hidden = j.at("hidden").get<std::size_t>();
  cfg.attention_hidden = j.at("attention_hidden").get<std::size_t>();
  cfg.n_bins = j.at("n_bins").get<std::size_t>();
  cfg.ms_moe = j.at("ms_moe").get<bool>();
  cfg.moe.n_experts = j.at("n_experts").get<std::size_t>();
  cfg.moe.k_top = j.at("k_top").get<std::size_t>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

void save_checkpoint(const std::string& path, model::Backbone& net, const json& meta) {
  json header = meta;
  header["architecture"] = to_json(net.config());
  json tasks = json::array();
  json frozen = json::array();
  for (int t : net.tasks()) {
    tasks.push_back(t);
    if (net.task_frozen(t)) frozen.push_back(t);
  }
  header["tasks"] = tasks;
  header["frozen_tasks"] = frozen;

  std::vector<std::pair<std::string, const ad::Matrix*>> params;
  net.visit([&](const std::string& name, ad::Tensor& t) { params.emplace_back(name, &t.value()); });

  BinaryWriter w(path);
  w.bytes(kMagic, 4);
  w.u8(kVersion);
  for (int i = 0; i < 3; ++i) w.u8(0);
  w.str(header.dump());
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, m] : params) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(m->rows()));
    w.u32(static_cast<std::uint32_t>(m->cols()));
    for (Eigen::Index i = 0; i < m->size(); ++i) w.f64(m->data()[i]);
  }
  w.close();
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  BinaryReader r(path);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw DataError(path + ": not a checkpoint file");
  if (r.u8("version") != kVersion) throw DataError(path + ": unsupported checkpoint version");
  for (int i = 0; i < 3; ++i) r.u8("reserved");
  json header;
  model::BackboneConfig arch;
  try {
    header = json::parse(r.str("header"));
    arch = backbone_config_from_json(header.at("architecture"));
  } catch (const json::exception& e) {
    throw DataError(path + ": bad checkpoint header: " + e.what());
  }
  model::Backbone net(arch);
  for (const auto& t : header.at("tasks")) net.add_task(t.get<int>());
  for (const auto& t : header.at("frozen_tasks")) net.freeze_task(t.get<int>());

  std::vector<std::string> names;
  net.visit([&](const std::string& name, ad::Tensor&) { names.push_back(name); });
  const auto n = r.u32("parameter_count");
  if (n != names.size()) throw DataError(path + ": parameter count does not match the architecture");
  std::vector<ad::Matrix> values;
  for (std::uint32_t p = 0; p < n; ++p) {
    const auto name = r.str("parameter_name", 4096);
    if (name != names[p]) {
      throw DataError(path + ": expected parameter '" + names[p] + "', found '" + name + "'");
    }
    const auto rows = r.u32("rows");
    const auto cols = r.u32("cols");
    if (static_cast<std::uint64_t>(rows) * cols > (1ULL << 28)) {
      throw DataError(path + ": implausible shape for '" + name + "'");
    }
    ad::Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f64("values");
    values.push_back(std::move(m));
  }
  try {
    net.restore(values);
  } catch (const ContractError& e) {
    throw DataError(path + ": " + e.what());
  }
  return {std::move(net), std::move(header)};
}

}  // namespace survcl::io
