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

#include "survcl/model/backbone.hpp"

#include <json.hpp>

#include <string>

namespace survcl::io {

nlohmann::json to_json(const model::BackboneConfig& cfg);
model::BackboneConfig backbone_config_from_json(const nlohmann::json& j);

/// Model parameters plus a free-form JSON header (run provenance).
///
/// Layout: magic "SCCK", u8 version, 3 reserved bytes, header JSON
/// (u32 length + bytes), u32 parameter count, then per parameter its name,
/// u32 rows, u32 cols and f64 values row by row.
void save_checkpoint(const std::string& path, model::Backbone& net, const nlohmann::json& meta);

struct LoadedCheckpoint {
  model::Backbone model;
  nlohmann::json meta;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace survcl::io
