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

#include "lateindex/corpus_io.h"
#include "lateindex/types.h"

namespace lateindex {

/// Parameters of a planted multi-vector corpus with known answers.
struct SyntheticSpec {
    std::uint32_t pages = 500;
    std::uint32_t patches_per_page = 32;
    std::uint32_t dim = 16;
    std::uint32_t queries = 100;
    std::uint32_t tokens_per_query = 8;
    double noise_sigma = 0.1;
    std::uint64_t seed = 42;
    /// Consecutive pages grouped under one doc_id.
    std::uint32_t pages_per_doc = 20;

    /// Throws BadSpec.
    void validate() const;
};

struct SyntheticCorpus {
    std::vector<PageKey> page_keys;
    /// Row-major, page after page, patches_per_page rows each.
    Matrix page_vectors;
    std::uint32_t patches_per_page = 0;
    std::vector<QueryEmbedding> queries;
    /// The page each query was sampled from, parallel to `queries`.
    std::vector<PageKey> targets;
    Qrels qrels;

    std::vector<PatchRecord> records() const;
};

/// Fills every page with random unit vectors, then builds each query by
/// picking a target page uniformly, sampling tokens_per_query distinct
/// patches from it, adding N(0, sigma^2) noise per coordinate and
/// re-normalizing. With sigma = 0 the tokens are exact copies of the
/// sampled patches. Deterministic for a fixed SyntheticSpec.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

struct SyntheticFiles {
    std::string manifest;
    std::string corpus_vectors;
    std::string queries;
    std::string query_vectors;
    std::string qrels;
};

/// Writes manifest.jsonl, corpus.mvec, queries.jsonl, queries.mvec and
/// qrels.tsv into `out_dir` (created if missing). File references inside
/// the manifest and queries file are relative to `out_dir`.
SyntheticFiles write_synthetic(const SyntheticCorpus& corpus, const std::string& out_dir);

inline SyntheticFiles gen_synthetic(const SyntheticSpec& spec, const std::string& out_dir) {
    return write_synthetic(generate_synthetic(spec), out_dir);
}

}  // namespace lateindex
