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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lateindex/patch_store.h"

namespace lateindex {

/// One first-pass match: a store row and its similarity to the query.
/// The row maps back to its PatchKey through PatchStore::patch_key.
struct Hit {
    RowId row = 0;
    float score = 0.0f;

    bool operator==(const Hit&) const = default;
};

/// Strict total order used for every top-k: higher score first, then lower
/// row id (row order equals PatchKey order in a sealed store).
inline bool ranks_before(const Hit& a, const Hit& b) {
    return a.score > b.score || (a.score == b.score && a.row < b.row);
}

struct HnswParams {
    std::uint32_t M = 16;                 ///< max degree above layer 0; layer 0 allows 2*M
    std::uint32_t ef_construction = 200;
    std::uint64_t seed = 42;              ///< drives level assignment only

    void validate() const;
};

/// Hierarchical navigable small world graph over the rows of a PatchStore.
/// Similarity is the inner product (cosine on a normalized store). The graph
/// stores only topology; searches take the store it was built from.
class HnswGraph {
public:
    using NodeId = std::uint32_t;

    HnswGraph() = default;

    /// Inserts rows 0..n-1 in order. Deterministic for a fixed store and
    /// params. Throws EmptyStore and BadParams.
    static HnswGraph build(const PatchStore& store, const HnswParams& params);

    /// Rebuilds a graph from persisted topology. `links[node][layer]`.
    HnswGraph(NodeId entry_point, std::uint8_t max_level, std::vector<std::vector<std::vector<NodeId>>> links);

    std::size_t size() const { return links_.size(); }
    bool empty() const { return links_.empty(); }
    NodeId entry_point() const { return entry_point_; }
    std::uint8_t max_level() const { return max_level_; }
    std::uint8_t level(NodeId node) const { return static_cast<std::uint8_t>(links_[node].size() - 1); }
    std::span<const NodeId> neighbors(NodeId node, std::size_t layer) const { return links_[node][layer]; }

    bool operator==(const HnswGraph& other) const {
        return entry_point_ == other.entry_point_ && max_level_ == other.max_level_ && links_ == other.links_;
    }

private:
    NodeId entry_point_ = 0;
    std::uint8_t max_level_ = 0;
    std::vector<std::vector<std::vector<NodeId>>> links_;
};

/// Approximate top-k by graph search with beam width `ef`. Results are sorted
/// by ranks_before and scored with the same kernel as exact_search, so a
/// returned hit is never mis-scored. Throws BadParams (k == 0 or ef < k),
/// DimensionMismatch and EmptyStore.
std::vector<Hit> ann_search(const HnswGraph& graph, const PatchStore& store, std::span<const float> query,
                            std::size_t k, std::size_t ef);

/// Exhaustive top-k over every row. Ground truth for ann_search.
std::vector<Hit> exact_search(const PatchStore& store, std::span<const float> query, std::size_t k);

/// A pooled first-pass match: index into PatchStore::pages() and its score.
struct PageHit {
    std::size_t page_index = 0;
    float score = 0.0f;
};

/// One re-normalized mean vector per page, searched by exhaustive scan.
class PooledIndex {
public:
    PooledIndex() = default;
    PooledIndex(std::size_t dim, std::vector<float> vectors) : dim_(dim), vectors_(std::move(vectors)) {}

    std::size_t dim() const { return dim_; }
    std::size_t page_count() const { return dim_ == 0 ? 0 : vectors_.size() / dim_; }
    std::span<const float> vector(std::size_t page_index) const {
        return {vectors_.data() + page_index * dim_, dim_};
    }

    /// Top-k pages, higher score first, ties by page index (PageKey order).
    std::vector<PageHit> search(std::span<const float> query, std::size_t k) const;

private:
    std::size_t dim_ = 0;
    std::vector<float> vectors_;
};

/// Throws EmptyStore, or ZeroVector naming the page whose patches cancel.
PooledIndex build_pooled_index(const PatchStore& store);

}  // namespace lateindex
