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

#include "lateindex/retrieval.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "lateindex/error.h"
#include "lateindex/vector_math.h"

namespace lateindex {
namespace {

using Clock = std::chrono::steady_clock;

struct ScoredPage {
    std::size_t slot;  // position in the caller's page list
    float score;
};

/// Ranks `scored` by score descending, then by key(slot) ascending.
template <typename KeyOf>
RankedResult rank_pages(std::vector<ScoredPage> scored, std::size_t top_k, KeyOf&& key_of) {
    std::sort(scored.begin(), scored.end(), [&](const ScoredPage& a, const ScoredPage& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return key_of(a.slot) < key_of(b.slot);
    });
    RankedResult result;
    result.candidates_examined = scored.size();
    const std::size_t take = std::min(top_k, scored.size());
    result.entries.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        result.entries.push_back({key_of(scored[i].slot), scored[i].score, static_cast<std::uint32_t>(i + 1)});
    }
    return result;
}

bool passes_threshold(float score, float top_score, const RetrievalConfig& cfg) {
    if (!cfg.tau) {
        return true;
    }
    const double bar = cfg.tau_mode == TauMode::Absolute ? *cfg.tau : *cfg.tau * static_cast<double>(top_score);
    return static_cast<double>(score) >= bar;
}

}  // namespace

SearchIndex make_search_index(PatchStore store, HnswGraph graph) {
    SearchIndex index{std::move(store), std::move(graph), std::nullopt};
    try {
        index.pooled = build_pooled_index(index.store);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroVector) {
            throw;
        }
    }
    return index;
}

void validate_query(const QueryEmbedding& query, std::size_t dim) {
    if (query.matrix.rows() == 0) {
        throw Error(ErrorCode::EmptyQuery, "query '" + query.query_id + "' has no tokens");
    }
    if (query.matrix.cols() != dim) {
        throw Error(ErrorCode::DimensionMismatch, "query dimension " + std::to_string(query.matrix.cols()) +
                                                      " vs corpus " + std::to_string(dim));
    }
    check_finite(query.matrix.values());
}

CandidateSet first_pass_candidates(const QueryEmbedding& query, const SearchIndex& index, const RetrievalConfig& cfg) {
    cfg.validate();
    const auto& store = index.store;
    validate_query(query, store.dim());
    if (cfg.first_pass == FirstPass::Pooled && !index.pooled) {
        throw Error(ErrorCode::BadParams, "pooled first pass requested but the corpus has no pooled index");
    }

    CandidateSet out;
    out.per_token_contributions.resize(query.matrix.rows());
    std::vector<bool> seen(store.page_count(), false);

    for (std::size_t t = 0; t < query.matrix.rows(); ++t) {
        const auto token = query.matrix.row(t);
        // (page index, score) in rank order
        std::vector<std::pair<std::size_t, float>> hits;
        switch (cfg.first_pass) {
            case FirstPass::Hnsw:
                for (const auto& h : ann_search(index.graph, store, token, cfg.k_token, cfg.ef_search)) {
                    hits.emplace_back(store.page_of_row(h.row), h.score);
                }
                break;
            case FirstPass::Exact:
                for (const auto& h : exact_search(store, token, cfg.k_token)) {
                    hits.emplace_back(store.page_of_row(h.row), h.score);
                }
                break;
            case FirstPass::Pooled:
                for (const auto& h : index.pooled->search(token, cfg.k_token)) {
                    hits.emplace_back(h.page_index, h.score);
                }
                break;
        }
        out.first_pass_hits += hits.size();
        if (hits.empty()) {
            continue;
        }

        auto& contributed = out.per_token_contributions[t];
        const float top = hits.front().second;
        for (std::size_t i = 0; i < hits.size(); ++i) {
            const auto [page, score] = hits[i];
            if (i > 0 && !passes_threshold(score, top, cfg)) {
                continue;
            }
            if (std::find(contributed.begin(), contributed.end(), page) == contributed.end()) {
                contributed.push_back(page);
            }
            seen[page] = true;
        }
    }

    for (std::size_t p = 0; p < seen.size(); ++p) {
        if (seen[p]) {
            out.page_indices.push_back(p);
            out.pages.push_back(store.page(p).key);
        }
    }
    if (out.pages.size() > cfg.candidate_cap) {
        throw Error(ErrorCode::CandidateOverflow, std::to_string(out.pages.size()) + " candidate pages exceed cap " +
                                                      std::to_string(cfg.candidate_cap));
    }
    return out;
}

PageEmbedding reconstruct_page(const PatchStore& store, const PageKey& page) {
    return assemble_page(page, fetch_page_patches(store, page));
}

PageEmbedding assemble_page(const PageKey& page, std::vector<PatchRecord> records) {
    if (records.empty()) {
        throw Error(ErrorCode::EmptyPage, to_string(page) + " has no patches");
    }
    std::sort(records.begin(), records.end(),
              [](const PatchRecord& a, const PatchRecord& b) { return a.key.patch_number < b.key.patch_number; });
    const std::size_t dim = records.front().vector.size();
    Matrix matrix;
    for (std::size_t j = 0; j < records.size(); ++j) {
        const auto& rec = records[j];
        if (rec.key.page != page) {
            throw Error(ErrorCode::BadParams, "record of " + to_string(rec.key.page) + " while assembling " +
                                                  to_string(page));
        }
        if (rec.key.patch_number < j) {
            throw Error(ErrorCode::DuplicatePatch, to_string(page) + " patch " + std::to_string(rec.key.patch_number));
        }
        if (rec.key.patch_number > j) {
            throw Error(ErrorCode::MissingPatch, to_string(page) + " lacks patch " + std::to_string(j));
        }
        if (rec.vector.size() != dim) {
            throw Error(ErrorCode::DimensionMismatch, to_string(page) + " has ragged patch dimensions");
        }
        matrix.append_row(rec.vector);
    }
    return {page, std::move(matrix)};
}

float maxsim_score(MatrixView query, MatrixView page) {
    if (query.cols != page.cols) {
        throw Error(ErrorCode::DimensionMismatch,
                    "query dimension " + std::to_string(query.cols) + " vs page " + std::to_string(page.cols));
    }
    if (page.rows == 0) {
        throw Error(ErrorCode::EmptyPage, "page has no patches");
    }
    if (query.rows == 0) {
        throw Error(ErrorCode::EmptyQuery, "query has no tokens");
    }
    float total = 0.0f;
    for (std::size_t i = 0; i < query.rows; ++i) {
        const float* q = query.data.data() + i * query.cols;
        float best = -std::numeric_limits<float>::infinity();
        for (std::size_t j = 0; j < page.rows; ++j) {
            const float s = dot_unchecked(q, page.data.data() + j * page.cols, page.cols);
            if (s > best) {
                best = s;
            }
        }
        total += best;
    }
    return total;
}

float maxsim_score(const QueryEmbedding& query, const PageEmbedding& page) {
    return maxsim_score(query.matrix.view(), page.matrix.view());
}

RankedResult rerank(const QueryEmbedding& query, std::span<const PageEmbedding> pages, std::size_t top_k) {
    if (pages.empty()) {
        throw Error(ErrorCode::EmptyCandidates, "nothing to rerank");
    }
    if (top_k == 0) {
        throw Error(ErrorCode::BadParams, "top_k must be >= 1");
    }
    std::vector<ScoredPage> scored;
    scored.reserve(pages.size());
    for (std::size_t i = 0; i < pages.size(); ++i) {
        scored.push_back({i, maxsim_score(query, pages[i])});
    }
    return rank_pages(std::move(scored), top_k, [&](std::size_t slot) -> const PageKey& { return pages[slot].page; });
}

SearchOutcome search(const QueryEmbedding& query, const SearchIndex& index, const RetrievalConfig& cfg) {
    SearchOutcome out;
    const auto t0 = Clock::now();
    const auto candidates = first_pass_candidates(query, index, cfg);
    const auto t1 = Clock::now();

    std::vector<PageEmbedding> pages;
    pages.reserve(candidates.pages.size());
    for (const auto& key : candidates.pages) {
        pages.push_back(reconstruct_page(index.store, key));
    }
    out.result = rerank(query, pages, cfg.top_k);
    out.result.per_token_hits = candidates.first_pass_hits;
    const auto t2 = Clock::now();

    out.trace.candidates_examined = candidates.pages.size();
    out.trace.first_pass_hits = candidates.first_pass_hits;
    out.trace.first_pass_duration = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0);
    out.trace.rerank_duration = std::chrono::duration_cast<std::chrono::nanoseconds>(t2 - t1);
    return out;
}

RankedResult oracle_rank(const QueryEmbedding& query, const PatchStore& store, std::size_t top_k) {
    if (store.empty()) {
        throw Error(ErrorCode::EmptyStore, "oracle over an empty store");
    }
    if (top_k == 0) {
        throw Error(ErrorCode::BadParams, "top_k must be >= 1");
    }
    validate_query(query, store.dim());
    std::vector<ScoredPage> scored;
    scored.reserve(store.page_count());
    const auto qview = query.matrix.view();
    for (std::size_t p = 0; p < store.page_count(); ++p) {
        scored.push_back({p, maxsim_score(qview, store.page_view(p))});
    }
    return rank_pages(std::move(scored), top_k, [&](std::size_t slot) -> const PageKey& { return store.page(slot).key; });
}

}  // namespace lateindex
