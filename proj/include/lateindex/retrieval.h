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

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lateindex/hnsw_graph.h"
#include "lateindex/patch_store.h"
#include "lateindex/types.h"

namespace lateindex {

/// Everything a query needs: the sealed store, its graph, and, when the
/// corpus admits one, the mean-pooled page index.
struct SearchIndex {
    PatchStore store;
    HnswGraph graph;
    std::optional<PooledIndex> pooled;
};

/// Bundles a store and graph, attaching a pooled index when every page pools
/// to a non-zero vector.
SearchIndex make_search_index(PatchStore store, HnswGraph graph);

/// Deduplicated pages surviving the first pass.
struct CandidateSet {
    /// Ascending PageKey order.
    std::vector<PageKey> pages;
    /// Indices into PatchStore::pages(), parallel to `pages`.
    std::vector<std::size_t> page_indices;
    /// For token i, the page indices it contributed (before deduplication
    /// across tokens, deduplicated within the token).
    std::vector<std::vector<std::size_t>> per_token_contributions;
    std::size_t first_pass_hits = 0;
};

struct PipelineTrace {
    std::size_t candidates_examined = 0;
    std::size_t first_pass_hits = 0;
    std::chrono::nanoseconds first_pass_duration{0};
    std::chrono::nanoseconds rerank_duration{0};
};

struct SearchOutcome {
    RankedResult result;
    PipelineTrace trace;
};

/// Throws EmptyQuery, DimensionMismatch or NonFinite.
void validate_query(const QueryEmbedding& query, std::size_t dim);

/// Per-token first pass. For every token, the page of its best hit always
/// enters the set; any further hit enters when its score clears the
/// threshold (absolute: score >= tau; relative_to_top: score >= tau * best).
/// With tau unset every hit contributes. Throws CandidateOverflow when the
/// union exceeds cfg.candidate_cap.
CandidateSet first_pass_candidates(const QueryEmbedding& query, const SearchIndex& index, const RetrievalConfig& cfg);

/// Rebuilds a page's m x d matrix from its stored patches. Throws UnknownPage.
PageEmbedding reconstruct_page(const PatchStore& store, const PageKey& page);

/// Orders patch records of one page by patch number and stacks them.
/// Throws MissingPatch, DuplicatePatch, DimensionMismatch or EmptyPage.
PageEmbedding assemble_page(const PageKey& page, std::vector<PatchRecord> records);

/// Late-interaction score: sum over query rows of the best inner product
/// against any page row. Tokens are summed in ascending order.
float maxsim_score(MatrixView query, MatrixView page);
float maxsim_score(const QueryEmbedding& query, const PageEmbedding& page);

/// Scores and sorts candidate pages (score descending, PageKey ascending),
/// keeping the first top_k. Throws EmptyCandidates.
RankedResult rerank(const QueryEmbedding& query, std::span<const PageEmbedding> pages, std::size_t top_k);

/// First pass, page reconstruction, then late-interaction rerank.
SearchOutcome search(const QueryEmbedding& query, const SearchIndex& index, const RetrievalConfig& cfg);

/// Exhaustive baseline: late interaction against every page in the store.
RankedResult oracle_rank(const QueryEmbedding& query, const PatchStore& store, std::size_t top_k);

}  // namespace lateindex
