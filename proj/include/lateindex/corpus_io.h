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
#include <map>
#include <string>
#include <vector>

#include "lateindex/types.h"

namespace lateindex {

/// One manifest line: a page whose `patches` vectors start at row
/// `offset_vectors` of the MVEC file `file`.
struct ManifestEntry {
    std::string doc_id;
    std::uint32_t page = 0;
    std::uint32_t patches = 0;
    std::string file;
    std::uint64_t offset_vectors = 0;

    bool operator==(const ManifestEntry&) const = default;
};

struct CorpusManifest {
    std::vector<ManifestEntry> entries;
    /// Relative `file` paths resolve against this directory.
    std::string base_dir;
};

/// JSON-lines, exactly {"doc_id","page","patches","file","offset_vectors"}.
/// Throws IoFailure and MalformedLine.
CorpusManifest read_manifest(const std::string& path);
void write_manifest(const CorpusManifest& manifest, const std::string& path);

/// Expands every manifest entry into one record per patch, numbering
/// patches by row order. Throws IoFailure, CorruptFile (range outside the
/// file), DimensionMismatch and DuplicatePage.
std::vector<PatchRecord> ingest_corpus(const CorpusManifest& manifest, bool normalize);

/// One query line: `tokens` rows of `file` starting at `offset_vectors`.
struct QueryEntry {
    std::string query_id;
    std::string file;
    std::uint64_t offset_vectors = 0;
    std::uint32_t tokens = 0;
};

std::vector<QueryEntry> read_query_entries(const std::string& path);
void write_query_entries(const std::vector<QueryEntry>& entries, const std::string& path);

/// Reads a queries file and materializes each query from its MVEC rows.
std::vector<QueryEmbedding> read_queries(const std::string& path);

/// query_id -> relevant page -> relevance grade.
using Qrels = std::map<std::string, std::map<PageKey, int>>;

/// Tab-separated `query_id doc_id page relevance`. Throws IoFailure and
/// MalformedLine.
Qrels read_qrels(const std::string& path);
void write_qrels(const Qrels& qrels, const std::string& path);

}  // namespace lateindex
