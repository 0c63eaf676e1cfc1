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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "lateindex/error.h"
#include "lateindex/hnsw_graph.h"
#include "lateindex/index_io.h"
#include "lateindex/patch_store.h"
#include "lateindex/vector_math.h"
#include "support/oracles.h"
#include "support/test_util.h"

using namespace lateindex;
using lateindex::testkit::basis;
using lateindex::testkit::random_unit;

namespace {

ErrorCode build_error(const std::vector<PatchRecord>& records) {
    try {
        build_store(records, true);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "build_store accepted bad records";
    return ErrorCode::EmptyInput;
}

/// Store of n single-patch pages, one random unit vector each.
PatchStore point_store(std::size_t n, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<PatchRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
        records.push_back({{{"p", static_cast<std::uint32_t>(i)}, 0}, random_unit(rng, dim)});
    }
    return build_store(records, true);
}

double mean_recall(const HnswGraph& graph, const PatchStore& store, std::size_t queries, std::size_t k,
                   std::size_t ef, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double total = 0.0;
    for (std::size_t q = 0; q < queries; ++q) {
        const auto query = random_unit(rng, store.dim());
        std::set<RowId> truth;
        for (const auto& h : exact_search(store, query, k)) {
            truth.insert(h.row);
        }
        std::size_t found = 0;
        for (const auto& h : ann_search(graph, store, query, k, ef)) {
            found += truth.count(h.row);
        }
        total += static_cast<double>(found) / static_cast<double>(k);
    }
    return total / static_cast<double>(queries);
}

}  // namespace

TEST(PatchStoreTest, TwoPagesThreePatches) {
    std::mt19937_64 rng(1);
    const auto records = lateindex::testkit::random_records(rng, 2, 3, 4);
    const auto store = build_store(records, true);
    EXPECT_EQ(store.row_count(), 6u);
    EXPECT_EQ(store.page_count(), 2u);
    EXPECT_EQ(store.dim(), 4u);
    EXPECT_EQ(store.page(1).first_row, 3u);
    EXPECT_EQ(store.page(1).patch_count, 3u);
    EXPECT_EQ(store.patch_key(4), (PatchKey{{"d0", 1}, 1}));
    EXPECT_EQ(store.page_of_row(2), 0u);
    EXPECT_EQ(store.find_page({"d0", 1}), 1u);
    EXPECT_FALSE(store.find_page({"d0", 7}).has_value());
}

TEST(PatchStoreTest, ShuffledDeliveryGivesIdenticalBytes) {
    std::mt19937_64 rng(2);
    auto records = lateindex::testkit::random_records(rng, 12, 5, 8);
    const auto sorted_store = build_store(records, true);
    std::shuffle(records.begin(), records.end(), rng);
    const auto shuffled_store = build_store(records, true);

    const HnswParams params{8, 32, 5};
    const auto a = encode_index(sorted_store, HnswGraph::build(sorted_store, params));
    const auto b = encode_index(shuffled_store, HnswGraph::build(shuffled_store, params));
    EXPECT_EQ(a, b);
}

TEST(PatchStoreTest, ValidationErrors) {
    std::mt19937_64 rng(3);
    auto gap = lateindex::testkit::random_records(rng, 1, 4, 4);
    gap.erase(gap.begin() + 2);  // patches {0,1,3}
    EXPECT_EQ(build_error(gap), ErrorCode::MissingPatch);

    auto dup = lateindex::testkit::random_records(rng, 1, 2, 4);
    dup.push_back(dup.front());
    EXPECT_EQ(build_error(dup), ErrorCode::DuplicatePatch);

    auto ragged = lateindex::testkit::random_records(rng, 2, 2, 4);
    ragged.back().vector.push_back(0.5f);
    EXPECT_EQ(build_error(ragged), ErrorCode::DimensionMismatch);

    EXPECT_EQ(build_error({}), ErrorCode::EmptyStore);
    EXPECT_EQ(build_error({{{{"a", 0}, 0}, {0.0f, 0.0f}}}), ErrorCode::ZeroVector);
    EXPECT_EQ(build_error({{{{"a", 0}, 0}, {NAN, 1.0f}}}), ErrorCode::NonFinite);
}

TEST(PatchStoreTest, UnnormalizedStoreKeepsValues) {
    const std::vector<PatchRecord> records{{{{"a", 0}, 0}, {3.0f, 4.0f}}};
    EXPECT_EQ(build_store(records, false).row(0)[0], 3.0f);
    EXPECT_FLOAT_EQ(build_store(records, true).row(0)[0], 0.6f);
    EXPECT_EQ(build_error({{{{"a", 0}, 0}, {1.0f, 1.0f}}, {{{"a", 0}, 1}, {1.0f, INFINITY}}}), ErrorCode::NonFinite);
}

TEST(PatchStoreTest, FetchPagePatches) {
    std::mt19937_64 rng(4);
    auto records = lateindex::testkit::random_records(rng, 3, 3, 6);
    const auto store = build_store(records, false);
    const auto fetched = fetch_page_patches(store, {"d0", 1});
    ASSERT_EQ(fetched.size(), 3u);
    for (std::uint32_t j = 0; j < 3; ++j) {
        EXPECT_EQ(fetched[j].key.patch_number, j);
        EXPECT_EQ(fetched[j].vector, records[3 + j].vector);  // bit-exact
    }
    try {
        fetch_page_patches(store, {"nope", 0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownPage);
    }
}

TEST(HnswTest, SingleNode) {
    const auto store = point_store(1, 8, 1);
    const auto graph = HnswGraph::build(store, {});
    EXPECT_EQ(graph.size(), 1u);
    EXPECT_EQ(graph.entry_point(), 0u);
    const auto hits = ann_search(graph, store, store.row(0), 1, 1);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].row, 0u);
}

TEST(HnswTest, RecallOnThousandVectors) {
    const auto store = point_store(1000, 16, 42);
    const auto graph = HnswGraph::build(store, {});
    EXPECT_GE(mean_recall(graph, store, 50, 10, 64, 43), 0.95);
}

TEST(HnswTest, BuildIsDeterministic) {
    const auto store = point_store(1000, 16, 42);
    const auto a = HnswGraph::build(store, {});
    const auto b = HnswGraph::build(store, {});
    EXPECT_TRUE(a == b);
    const auto c = HnswGraph::build(store, {16, 200, 7});
    EXPECT_FALSE(a == c);
}

TEST(HnswTest, StructuralInvariants) {
    const auto store = point_store(2000, 8, 11);
    const HnswParams params{6, 40, 3};
    const auto graph = HnswGraph::build(store, params);
    EXPECT_EQ(graph.level(graph.entry_point()), graph.max_level());
    for (HnswGraph::NodeId n = 0; n < graph.size(); ++n) {
        for (std::size_t layer = 0; layer <= graph.level(n); ++layer) {
            const auto nb = graph.neighbors(n, layer);
            EXPECT_LE(nb.size(), layer == 0 ? 2 * params.M : params.M);
            for (auto m : nb) {
                EXPECT_NE(m, n);
                EXPECT_GE(graph.level(m), layer);
            }
        }
    }
    // every node reachable from the entry point on layer 0
    std::vector<bool> seen(graph.size(), false);
    std::vector<HnswGraph::NodeId> stack{graph.entry_point()};
    seen[graph.entry_point()] = true;
    while (!stack.empty()) {
        const auto n = stack.back();
        stack.pop_back();
        for (auto m : graph.neighbors(n, 0)) {
            if (!seen[m]) {
                seen[m] = true;
                stack.push_back(m);
            }
        }
    }
    EXPECT_EQ(std::count(seen.begin(), seen.end(), true), static_cast<std::ptrdiff_t>(graph.size()));
}

TEST(HnswTest, IndexedVectorIsTopHit) {
    const auto store = point_store(10, 16, 5);
    const auto graph = HnswGraph::build(store, {});
    for (RowId r = 0; r < 10; ++r) {
        const auto hits = ann_search(graph, store, store.row(r), 1, 10);
        ASSERT_EQ(hits.size(), 1u);
        EXPECT_EQ(hits[0].row, r);
        EXPECT_NEAR(hits[0].score, 1.0f, 1e-6);
        EXPECT_EQ(hits[0].score, exact_search(store, store.row(r), 1)[0].score);
    }
}

TEST(HnswTest, KLargerThanStoreReturnsAll) {
    const auto store = point_store(10, 8, 6);
    const auto graph = HnswGraph::build(store, {});
    const auto hits = ann_search(graph, store, store.row(3), 25, 25);
    EXPECT_EQ(hits.size(), 10u);
    EXPECT_TRUE(std::is_sorted(hits.begin(), hits.end(), ranks_before));
}

TEST(HnswTest, TopOneRecallAtDimension32) {
    const auto store = point_store(5000, 32, 17);
    const auto graph = HnswGraph::build(store, {});
    EXPECT_GE(mean_recall(graph, store, 100, 1, 128, 18), 0.98);
}

TEST(HnswTest, RecallGrowsWithBeamWidth) {
    const auto store = point_store(3000, 32, 21);
    const auto graph = HnswGraph::build(store, {8, 40, 1});
    const double low = mean_recall(graph, store, 100, 10, 10, 22);
    const double high = mean_recall(graph, store, 100, 10, 200, 22);
    EXPECT_LE(low, high);
    EXPECT_GE(high, 0.95);
}

TEST(HnswTest, BadParameters) {
    const auto store = point_store(10, 4, 1);
    const auto graph = HnswGraph::build(store, {});
    const auto q = store.row(0);
    EXPECT_THROW(ann_search(graph, store, q, 0, 10), Error);
    EXPECT_THROW(ann_search(graph, store, q, 5, 4), Error);
    EXPECT_THROW(ann_search(graph, store, std::vector<float>(5, 0.1f), 1, 1), Error);
    EXPECT_THROW(HnswGraph::build(store, {1, 10, 1}), Error);
    EXPECT_THROW(HnswGraph::build(PatchStore{}, {}), Error);
}

TEST(ExactSearchTest, BasisStore) {
    const std::vector<PatchRecord> records{{{{"a", 0}, 0}, basis(2, 0)}, {{{"a", 0}, 1}, basis(2, 1)}};
    const auto store = build_store(records, true);
    const auto hits = exact_search(store, basis(2, 0), 1);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(store.patch_key(hits[0].row), (PatchKey{{"a", 0}, 0}));
    EXPECT_EQ(hits[0].score, 1.0f);
}

TEST(ExactSearchTest, FullRankingIsNonIncreasing) {
    const auto store = point_store(50, 8, 2);
    std::mt19937_64 rng(9);
    const auto hits = exact_search(store, random_unit(rng, 8), 50);
    ASSERT_EQ(hits.size(), 50u);
    for (std::size_t i = 1; i < hits.size(); ++i) {
        EXPECT_GE(hits[i - 1].score, hits[i].score);
    }
}

TEST(ExactSearchTest, MatchesSortAllOracle) {
    const auto store = point_store(200, 8, 3);
    oracle::Rows rows;
    for (RowId r = 0; r < store.row_count(); ++r) {
        rows.emplace_back(store.row(r).begin(), store.row(r).end());
    }
    std::mt19937_64 rng(3);
    for (int q = 0; q < 20; ++q) {
        const auto query = random_unit(rng, 8);
        const auto expected = oracle::sort_all(rows, query);
        const auto hits = exact_search(store, query, 200);
        ASSERT_EQ(hits.size(), expected.size());
        for (std::size_t i = 0; i < hits.size(); ++i) {
            EXPECT_NEAR(hits[i].score, expected[i].second, 1e-6);
            if (i < 10) {
                EXPECT_EQ(hits[i].row, expected[i].first);
            }
        }
    }
}

TEST(ExactSearchTest, TiesBreakByRowId) {
    std::vector<PatchRecord> records;
    for (std::uint32_t i = 0; i < 6; ++i) {
        records.push_back({{{"t", i}, 0}, basis(2, 0)});
    }
    const auto store = build_store(records, true);
    const auto hits = exact_search(store, basis(2, 0), 6);
    for (RowId i = 0; i < 6; ++i) {
        EXPECT_EQ(hits[i].row, i);
    }
}

TEST(PooledIndexTest, IdenticalPatchesPoolToThemselves) {
    const std::vector<float> v{0.6f, 0.8f};
    const std::vector<PatchRecord> records{{{{"a", 0}, 0}, v}, {{{"a", 0}, 1}, v}, {{{"a", 0}, 2}, v}};
    const auto pooled = build_pooled_index(build_store(records, false));
    ASSERT_EQ(pooled.page_count(), 1u);
    EXPECT_FLOAT_EQ(pooled.vector(0)[0], 0.6f);
    EXPECT_FLOAT_EQ(pooled.vector(0)[1], 0.8f);
}

TEST(PooledIndexTest, CancellingPatchesFail) {
    const std::vector<PatchRecord> records{{{{"ok", 0}, 0}, basis(2, 1)},
                                           {{{"zero", 4}, 0}, {1.0f, 0.0f}},
                                           {{{"zero", 4}, 1}, {-1.0f, 0.0f}}};
    try {
        build_pooled_index(build_store(records, false));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
        EXPECT_NE(std::string(e.what()).find("zero#4"), std::string::npos);
    }
}

TEST(PooledIndexTest, MatchesMeanThenNormalizeOracle) {
    std::mt19937_64 rng(8);
    const auto records = lateindex::testkit::random_records(rng, 1, 4, 8);
    const auto store = build_store(records, false);
    const auto pooled = build_pooled_index(store);
    const auto expected = oracle::mean_then_normalize(lateindex::testkit::rows_of(store.page_view(0)));
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_NEAR(pooled.vector(0)[i], expected[i], 1e-6);
    }
}

TEST(PooledIndexTest, SearchOrdersPages) {
    const std::vector<PatchRecord> records{{{{"a", 0}, 0}, basis(3, 0)},
                                           {{{"a", 1}, 0}, basis(3, 1)},
                                           {{{"a", 2}, 0}, basis(3, 0)}};
    const auto pooled = build_pooled_index(build_store(records, true));
    const auto hits = pooled.search(basis(3, 0), 3);
    ASSERT_EQ(hits.size(), 3u);
    EXPECT_EQ(hits[0].page_index, 0u);
    EXPECT_EQ(hits[1].page_index, 2u);
    EXPECT_EQ(hits[2].page_index, 1u);
}
