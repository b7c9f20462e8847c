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

#include "survcl/io/feature_bag.hpp"

#include "survcl/error.hpp"
#include "survcl/io/binary.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

namespace survcl::io {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kMagic[4] = {'S', 'C', 'F', 'B'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint32_t kMaxPatches = 1u << 20;
constexpr std::uint32_t kMaxDim = 1u << 16;

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) throw DataError(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

[[noreturn]] void corrupt(const std::string& path, const std::string& field,
                          const std::string& what) {
  throw DataError(path + ": field '" + field + "': " + what);
}

}  // namespace

void write_task_file(const TaskDataset& task, const std::string& path) {
  BinaryWriter w(path);
  w.bytes(kMagic, 4);
  w.u8(kVersion);
  for (int i = 0; i < 3; ++i) w.u8(0);
  w.u32(static_cast<std::uint32_t>(task.task));
  w.u32(checked_u32(task.cases.size(), "case count"));
  const std::size_t patch_dim = task.cases.empty() ? 0 : task.cases.front().patches.dim();
  w.u32(checked_u32(patch_dim, "patch dim"));
  w.u32(kGenomicGroups);
  for (auto d : task.genomic_dims) w.u32(checked_u32(d, "group width"));
  for (const auto& c : task.cases) {
    if (c.patches.dim() != patch_dim) throw DimensionError("case '" + c.id + "' has a different patch dim");
    if (static_cast<std::size_t>(c.genomics.groups.rows()) != kGenomicGroups) {
      throw DimensionError("case '" + c.id + "' does not have six genomic groups");
    }
    w.str(c.id);
    w.u32(static_cast<std::uint32_t>(c.task));
    w.f64(c.time);
    w.u8(static_cast<std::uint8_t>(c.censor));
    w.u32(checked_u32(c.patches.size(), "patch count"));
    const auto& p = c.patches.features;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.cols(); ++j) w.f32(static_cast<float>(p(i, j)));
    }
    for (std::size_t g = 0; g < kGenomicGroups; ++g) {
      if (task.genomic_dims[g] > c.genomics.width()) {
        throw DimensionError("case '" + c.id + "' is narrower than its declared group width");
      }
      for (std::size_t j = 0; j < task.genomic_dims[g]; ++j) {
        w.f32(static_cast<float>(c.genomics.groups(static_cast<Eigen::Index>(g),
                                                   static_cast<Eigen::Index>(j))));
      }
    }
  }
  w.close();
}

TaskDataset read_task_file(const std::string& path, const std::string& name) {
  BinaryReader r(path);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) corrupt(path, "magic", "not a feature-bag file");
  if (r.u8("version") != kVersion) corrupt(path, "version", "unsupported version");
  for (int i = 0; i < 3; ++i) r.u8("reserved");

  TaskDataset task;
  task.name = name;
  task.task = r.i32("task_id");
  const auto n_cases = r.u32("n_cases");
  const auto patch_dim = r.u32("patch_dim");
  if (patch_dim == 0 || patch_dim > kMaxDim) corrupt(path, "patch_dim", "out of range");
  const auto n_groups = r.u32("n_groups");
  if (n_groups != kGenomicGroups) corrupt(path, "n_groups", "expected 6 genomic groups");
  std::size_t width = 0;
  for (auto& d : task.genomic_dims) {
    d = r.u32("group_dims");
    if (d == 0 || d > kMaxDim) corrupt(path, "group_dims", "out of range");
    width = std::max(width, d);
  }

  std::set<std::string> ids;
  for (std::uint32_t n = 0; n < n_cases; ++n) {
    CaseRecord c;
    c.id = r.str("case_id", 4096);
    if (!ids.insert(c.id).second) corrupt(path, "case_id", "duplicate id '" + c.id + "'");
    c.task = r.i32("case_task_id");
    if (c.task != task.task) corrupt(path, "case_task_id", "differs from the header task id");
    c.time = r.f64("time");
    if (!std::isfinite(c.time) || c.time < 0.0) corrupt(path, "time", "must be finite and nonnegative");
    const auto censor = r.u8("censor");
    if (censor > 1) corrupt(path, "censor", "must be 0 or 1");
    c.censor = censor;
    const auto n_patches = r.u32("n_patches");
    if (n_patches == 0 || n_patches > kMaxPatches) corrupt(path, "n_patches", "out of range");
    c.patches.features.resize(n_patches, patch_dim);
    for (Eigen::Index i = 0; i < c.patches.features.size(); ++i) {
      c.patches.features.data()[i] = r.f32("patches");
    }
    c.genomics.groups = ad::Matrix::Zero(kGenomicGroups, static_cast<Eigen::Index>(width));
    for (std::size_t g = 0; g < kGenomicGroups; ++g) {
      for (std::size_t j = 0; j < task.genomic_dims[g]; ++j) {
        c.genomics.groups(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(j)) =
            r.f32("genomics");
      }
    }
    task.cases.push_back(std::move(c));
  }
  if (!r.at_end()) corrupt(path, "payload", "trailing bytes after the last case");
  return task;
}

void write_stream(const TaskStream& stream, const std::string& dir) {
  if (stream.size() == 0) throw DataError("cannot write an empty stream");
  fs::create_directories(dir);
  json manifest;
  manifest["version"] = kVersion;
  manifest["n_bins"] = stream.tasks.front().bins.n_bins;
  manifest["tasks"] = json::array();
  for (const auto& t : stream.tasks) {
    const std::string file = t.name + ".fbag";
    write_task_file(t, (fs::path(dir) / file).string());
    manifest["tasks"].push_back({{"name", t.name}, {"file", file}});
  }
  std::ofstream out(fs::path(dir) / kManifestName);
  out << manifest.dump(2) << "\n";
  if (!out) throw DataError(dir + ": cannot write manifest");
}

TaskStream ingest_feature_bags(const std::string& dir) {
  const auto manifest_path = (fs::path(dir) / kManifestName).string();
  std::ifstream in(manifest_path);
  if (!in) throw DataError(manifest_path + ": manifest not found");
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw DataError(manifest_path + ": " + e.what());
  }
  auto field = [&](const json& j, const char* key) -> const json& {
    if (!j.is_object() || !j.contains(key)) {
      throw DataError(manifest_path + ": missing field '" + key + "'");
    }
    return j.at(key);
  };
  std::size_t n_bins = 0;
  try {
    n_bins = field(manifest, "n_bins").get<std::size_t>();
  } catch (const json::exception&) {
    throw DataError(manifest_path + ": field 'n_bins' must be a positive integer");
  }
  const json& tasks = field(manifest, "tasks");
  if (!tasks.is_array() || tasks.empty()) throw DataError(manifest_path + ": 'tasks' must be a non-empty list");

  TaskStream stream;
  std::set<int> ids;
  for (const auto& entry : tasks) {
    const auto& name = field(entry, "name");
    const auto& file = field(entry, "file");
    if (!name.is_string() || !file.is_string()) {
      throw DataError(manifest_path + ": task entries need string 'name' and 'file'");
    }
    const auto path = (fs::path(dir) / file.get<std::string>()).string();
    if (!fs::exists(path)) throw DataError(path + ": listed in the manifest but missing");
    auto task = read_task_file(path, name.get<std::string>());
    if (task.cases.empty()) throw DataError(path + ": field 'n_cases': task has no cases");
    if (!ids.insert(task.task).second) throw DataError(path + ": field 'task_id': duplicate task id");
    if (!stream.tasks.empty() && task.cases.front().patches.dim() != stream.patch_dim()) {
      throw DataError(path + ": field 'patch_dim': differs from earlier tasks");
    }
    stream.tasks.push_back(std::move(task));
  }
  pad_genomics(stream);
  for (auto& t : stream.tasks) {
    try {
      assign_labels(t, n_bins);
    } catch (const DataError& e) {
      throw DataError(t.name + ": " + e.what());
    }
  }
  return stream;
}

}  // namespace survcl::io
