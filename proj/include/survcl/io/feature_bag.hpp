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

#include "survcl/data.hpp"

#include <string>

namespace survcl::io {

inline constexpr const char* kManifestName = "manifest.json";

/// Writes one task as a feature-bag file. Features are stored as
/// little-endian 32-bit floats; each genomic group keeps its own width.
///
/// Layout: magic "SCFB", u8 version, 3 reserved bytes, u32 task id,
/// u32 case count, u32 patch dim, u32 group count, u32 group widths[6];
/// then per case: id (u32 length + bytes), u32 task id, f64 time,
/// u8 censor, u32 patch count, patch values row by row, group values.
void write_task_file(const TaskDataset& task, const std::string& path);

/// Reads one feature-bag file. Genomic groups come back at their stored
/// widths, padded only to the widest group of this file. Labels and bins
/// are left for the caller.
TaskDataset read_task_file(const std::string& path, const std::string& name);

/// Writes every task plus a manifest listing the task order and bin count.
void write_stream(const TaskStream& stream, const std::string& dir);

/// Reads the manifest and its files, zero-pads genomic groups to the widest
/// group across tasks and computes every task's bins and labels.
TaskStream ingest_feature_bags(const std::string& dir);

}  // namespace survcl::io
