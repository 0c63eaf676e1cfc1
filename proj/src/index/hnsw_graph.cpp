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

#include "lateindex/hnsw_graph.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <string>

#include "lateindex/error.h"
#include "lateindex/vector_math.h"

namespace lateindex {
namespace {

using NodeId = HnswGraph::NodeId;
using Links = std::vector<std::vector<std::vector<NodeId>>>;

struct Candidate {
    float score;
    NodeId id;
};

inline bool better(const Candidate& a, const Candidate& b) {
    return a.score > b.score || (a.score == b.score && a.id < b.id);
}

struct BestOnTop {
    bool operator()(const Candidate& a, const Candidate& b) const { return better(b, a); }
};
struct WorstOnTop {
    bool operator()(const Candidate& a, const Candidate& b) const { return better(a, b); }
};

/// Epoch-tagged visited marks; reset is O(1) except on wrap-around.
class VisitedSet {
public:
    void prepare(std::size_t n) {
        if (tags_.size() < n) {
            tags_.assign(n, 0);
            epoch_ = 0;
        }
        if (++epoch_ == 0) {
            std::fill(tags_.begin(), tags_.end(), 0);
            epoch_ = 1;
        }
    }
    bool test_and_set(NodeId id) {
        if (tags_[id] == epoch_) {
            return true;
        }
        tags_[id] = epoch_;
        return false;
    }

private:
    std::vector<std::uint32_t> tags_;
    std::uint32_t epoch_ = 0;
};

VisitedSet& thread_visited() {
    thread_local VisitedSet visited;
    return visited;
}

struct LinkTable {
    const Links& links;
    std::span<const NodeId> neighbors(NodeId id, std::size_t layer) const { return links[id][layer]; }
    std::size_t size() const { return links.size(); }
};

/// Greedy descent and beam search over any adjacency exposing
/// neighbors(id, layer) and size().
template <typename Adjacency>
class LayerSearch {
public:
    LayerSearch(const PatchStore& store, Adjacency adjacency) : store_(store), adj_(adjacency) {}

    float score(const float* query, NodeId id) const {
        return dot_unchecked(query, store_.row_ptr(id), store_.dim());
    }

    NodeId greedy(const float* query, NodeId start, std::size_t layer) const {
        Candidate cur{score(query, start), start};
        for (bool changed = true; changed;) {
            changed = false;
            for (NodeId n : adj_.neighbors(cur.id, layer)) {
                Candidate c{score(query, n), n};
                if (better(c, cur)) {
                    cur = c;
                    changed = true;
                }
            }
        }
        return cur.id;
    }

    /// Beam search on one layer; returns up to ef nodes, best first.
    std::vector<Candidate> beam(const float* query, std::span<const Candidate> entries, std::size_t ef,
                                std::size_t layer, VisitedSet& visited) const {
        visited.prepare(adj_.size());
        std::priority_queue<Candidate, std::vector<Candidate>, BestOnTop> frontier;
        std::priority_queue<Candidate, std::vector<Candidate>, WorstOnTop> results;
        for (const auto& e : entries) {
            if (visited.test_and_set(e.id)) {
                continue;
            }
            frontier.push(e);
            results.push(e);
            if (results.size() > ef) {
                results.pop();
            }
        }
        while (!frontier.empty()) {
            const Candidate c = frontier.top();
            if (better(results.top(), c) && results.size() >= ef) {
                break;
            }
            frontier.pop();
            for (NodeId n : adj_.neighbors(c.id, layer)) {
                if (visited.test_and_set(n)) {
                    continue;
                }
                Candidate next{score(query, n), n};
                if (results.size() < ef || better(next, results.top())) {
                    frontier.push(next);
                    results.push(next);
                    if (results.size() > ef) {
                        results.pop();
                    }
                }
            }
        }
        std::vector<Candidate> out(results.size());
        for (std::size_t i = out.size(); i-- > 0;) {
            out[i] = results.top();
            results.pop();
        }
        return out;
    }

private:
    const PatchStore& store_;
    Adjacency adj_;
};

class Builder {
public:
    Builder(const PatchStore& store, const HnswParams& params)
        : store_(store), params_(params), search_(store, LinkTable{links_}) {}

    HnswGraph run() {
        const std::size_t n = store_.row_count();
        links_.resize(n);

        // Levels are drawn up front, in row order, from one seeded stream.
        std::mt19937_64 rng(params_.seed);
        const double level_mult = 1.0 / std::log(static_cast<double>(params_.M));
        std::vector<std::uint8_t> levels(n);
        for (auto& level : levels) {
            const double u = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
            const double drawn = std::floor(-std::log(u) * level_mult);
            level = static_cast<std::uint8_t>(std::min(drawn, 255.0));
        }

        for (NodeId i = 0; i < n; ++i) {
            insert(i, levels[i]);
        }
        return HnswGraph(entry_point_, max_level_, std::move(links_));
    }

private:
    std::size_t max_degree(std::size_t layer) const { return layer == 0 ? 2 * params_.M : params_.M; }

    void insert(NodeId id, std::uint8_t level) {
        links_[id].resize(std::size_t{level} + 1);
        if (id == 0) {
            entry_point_ = 0;
            max_level_ = level;
            return;
        }
        const float* query = store_.row_ptr(id);
        NodeId cur = entry_point_;
        for (std::size_t layer = max_level_; layer > level; --layer) {
            cur = search_.greedy(query, cur, layer);
        }

        std::vector<Candidate> entries{{search_.score(query, cur), cur}};
        for (std::size_t layer = std::min<std::size_t>(level, max_level_) + 1; layer-- > 0;) {
            auto found = search_.beam(query, entries, params_.ef_construction, layer, visited_);
            auto selected = select_neighbors(found, params_.M);
            auto& own = links_[id][layer];
            own.clear();
            for (const auto& c : selected) {
                own.push_back(c.id);
            }
            for (const auto& c : selected) {
                connect(c.id, id, layer);
            }
            entries = std::move(found);
        }

        if (level > max_level_) {
            entry_point_ = id;
            max_level_ = level;
        }
    }

    /// Diversity heuristic: keep a candidate only if it is closer to the base
    /// than to every neighbor already kept. Pruned candidates are dropped.
    std::vector<Candidate> select_neighbors(std::span<const Candidate> sorted, std::size_t limit) const {
        std::vector<Candidate> kept;
        kept.reserve(limit);
        for (const auto& c : sorted) {
            if (kept.size() >= limit) {
                break;
            }
            const float* cv = store_.row_ptr(c.id);
            bool diverse = true;
            for (const auto& k : kept) {
                if (dot_unchecked(cv, store_.row_ptr(k.id), store_.dim()) > c.score) {
                    diverse = false;
                    break;
                }
            }
            if (diverse) {
                kept.push_back(c);
            }
        }
        return kept;
    }

    void connect(NodeId from, NodeId to, std::size_t layer) {
        auto& list = links_[from][layer];
        const std::size_t cap = max_degree(layer);
        if (list.size() < cap) {
            list.push_back(to);
            return;
        }
        const float* base = store_.row_ptr(from);
        std::vector<Candidate> pool;
        pool.reserve(list.size() + 1);
        for (NodeId n : list) {
            pool.push_back({search_.score(base, n), n});
        }
        pool.push_back({search_.score(base, to), to});
        std::sort(pool.begin(), pool.end(), better);
        auto kept = select_neighbors(pool, cap);
        list.clear();
        for (const auto& c : kept) {
            list.push_back(c.id);
        }
    }

    const PatchStore& store_;
    HnswParams params_;
    Links links_;
    LayerSearch<LinkTable> search_;
    VisitedSet visited_;
    NodeId entry_point_ = 0;
    std::uint8_t max_level_ = 0;
};

void check_query(const PatchStore& store, std::span<const float> query) {
    if (store.empty()) {
        throw Error(ErrorCode::EmptyStore, "store has no rows");
    }
    if (query.size() != store.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "query dimension " + std::to_string(query.size()) + " vs store " + std::to_string(store.dim()));
    }
}

}  // namespace

void HnswParams::validate() const {
    if (M < 2) {
        throw Error(ErrorCode::BadParams, "M must be >= 2");
    }
    if (ef_construction < M) {
        throw Error(ErrorCode::BadParams, "ef_construction must be >= M");
    }
}

HnswGraph::HnswGraph(NodeId entry_point, std::uint8_t max_level, std::vector<std::vector<std::vector<NodeId>>> links)
    : entry_point_(entry_point), max_level_(max_level), links_(std::move(links)) {}

HnswGraph HnswGraph::build(const PatchStore& store, const HnswParams& params) {
    params.validate();
    if (store.empty()) {
        throw Error(ErrorCode::EmptyStore, "cannot build a graph over an empty store");
    }
    if (store.row_count() > std::numeric_limits<NodeId>::max()) {
        throw Error(ErrorCode::Overflow, "store exceeds 2^32 rows");
    }
    return Builder(store, params).run();
}

std::vector<Hit> ann_search(const HnswGraph& graph, const PatchStore& store, std::span<const float> query,
                            std::size_t k, std::size_t ef) {
    if (k == 0 || ef < k) {
        throw Error(ErrorCode::BadParams, "need k >= 1 and ef >= k (k=" + std::to_string(k) +
                                              ", ef=" + std::to_string(ef) + ")");
    }
    check_query(store, query);
    if (graph.size() != store.row_count()) {
        throw Error(ErrorCode::BadParams, "graph does not match store");
    }

    const LayerSearch<const HnswGraph&> search(store, graph);
    NodeId cur = graph.entry_point();
    for (std::size_t layer = graph.max_level(); layer > 0; --layer) {
        cur = search.greedy(query.data(), cur, layer);
    }
    const Candidate entry{search.score(query.data(), cur), cur};
    auto found = search.beam(query.data(), std::span(&entry, 1), ef, 0, thread_visited());

    std::vector<Hit> hits;
    hits.reserve(found.size());
    for (const auto& c : found) {
        hits.push_back({c.id, c.score});
    }
    if (hits.size() > k) {
        hits.resize(k);
    }
    return hits;
}

std::vector<Hit> exact_search(const PatchStore& store, std::span<const float> query, std::size_t k) {
    if (k == 0) {
        throw Error(ErrorCode::BadParams, "k must be >= 1");
    }
    check_query(store, query);
    const std::size_t n = store.row_count();
    std::vector<Hit> all(n);
    for (RowId r = 0; r < n; ++r) {
        all[r] = {r, dot_unchecked(query.data(), store.row_ptr(r), store.dim())};
    }
    const std::size_t take = std::min(k, n);
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), ranks_before);
    all.resize(take);
    return all;
}

std::vector<PageHit> PooledIndex::search(std::span<const float> query, std::size_t k) const {
    if (k == 0) {
        throw Error(ErrorCode::BadParams, "k must be >= 1");
    }
    if (query.size() != dim_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "query dimension " + std::to_string(query.size()) + " vs pooled " + std::to_string(dim_));
    }
    const std::size_t n = page_count();
    std::vector<PageHit> all(n);
    for (std::size_t p = 0; p < n; ++p) {
        all[p] = {p, dot_unchecked(query.data(), vectors_.data() + p * dim_, dim_)};
    }
    auto order = [](const PageHit& a, const PageHit& b) {
        return a.score > b.score || (a.score == b.score && a.page_index < b.page_index);
    };
    const std::size_t take = std::min(k, n);
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), order);
    all.resize(take);
    return all;
}

PooledIndex build_pooled_index(const PatchStore& store) {
    if (store.empty()) {
        throw Error(ErrorCode::EmptyStore, "cannot pool an empty store");
    }
    const std::size_t dim = store.dim();
    std::vector<float> pooled;
    pooled.reserve(store.page_count() * dim);
    std::vector<double> mean(dim);
    std::vector<float> mean_f(dim);
    for (std::size_t p = 0; p < store.page_count(); ++p) {
        const auto view = store.page_view(p);
        std::fill(mean.begin(), mean.end(), 0.0);
        for (std::size_t j = 0; j < view.rows; ++j) {
            auto row = view.row(j);
            for (std::size_t c = 0; c < dim; ++c) {
                mean[c] += row[c];
            }
        }
        for (std::size_t c = 0; c < dim; ++c) {
            mean_f[c] = static_cast<float>(mean[c] / static_cast<double>(view.rows));
        }
        try {
            auto unit = l2_normalize(mean_f);
            pooled.insert(pooled.end(), unit.begin(), unit.end());
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ZeroVector) {
                throw Error(ErrorCode::ZeroVector, "mean of page " + to_string(store.page(p).key) + " is zero");
            }
            throw;
        }
    }
    return PooledIndex(dim, std::move(pooled));
}

}  // namespace lateindex
