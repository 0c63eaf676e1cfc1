// Copyright 2026-present the lateindex project
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

#include <cstdint>
#include <string>
#include <vector>

#include "lateindex/hnsw_graph.h"
#include "lateindex/patch_store.h"

namespace lateindex {

inline constexpr std::uint16_t kIndexFormatVersion = 1;

struct LoadedIndex {
    PatchStore store;
    HnswGraph graph;
};

/// Serializes store and graph into the single-file "LIDX" layout:
///
///   "LIDX" | version u16 | flags u16 (bit 0 = normalized) | d u32 |
///   rows u64 | pages u64 |
///   pages x (doc_id_len u16, doc_id bytes, page u32, first_row u64, m u32) |
///   rows x d f32 |
///   entry u64 | max_level u8 |
///   nodes x (level u8, (level+1) x (count u16, count x u64)) |
///   crc32c u32 over everything before it
///
/// All integers little-endian. Throws IoFailure.
void save_index(const PatchStore& store, const HnswGraph& graph, const std::string& path);

std::vector<std::uint8_t> encode_index(const PatchStore& store, const HnswGraph& graph);

/// Throws IoFailure, CorruptIndex (bad magic, checksum, or structure) and
/// VersionMismatch.
LoadedIndex load_index(const std::string& path);

LoadedIndex decode_index(std::span<const std::uint8_t> bytes);

}  // namespace lateindex
