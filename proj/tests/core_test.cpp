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

#include <cmath>
#include <limits>
#include <random>

#include "lateindex/error.h"
#include "lateindex/types.h"
#include "lateindex/vector_math.h"
#include "support/oracles.h"
#include "support/test_util.h"

using namespace lateindex;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::EmptyInput;
}

}  // namespace

TEST(VectorMathTest, NormalizeThreeFourFive) {
    const std::vector<float> v{3.0f, 4.0f};
    const auto n = l2_normalize(v);
    ASSERT_EQ(n.size(), 2u);
    EXPECT_FLOAT_EQ(n[0], 0.6f);
    EXPECT_FLOAT_EQ(n[1], 0.8f);
}

TEST(VectorMathTest, NormalizeUnitIsIdentity) {
    const std::vector<float> v{1.0f, 0.0f, 0.0f};
    EXPECT_EQ(l2_normalize(v), v);
}

TEST(VectorMathTest, NormAgainstCompensatedOracle) {
    std::mt19937_64 rng(7);
    const auto v = testkit::random_vector(rng, 16);
    const double expected = oracle::kahan_norm(v);
    EXPECT_NEAR(l2_norm(v), expected, 1e-6 * expected);

    const auto n = l2_normalize(v);
    for (std::size_t i = 0; i < v.size(); ++i) {
        EXPECT_NEAR(n[i], v[i] / expected, 1e-6);
    }
    EXPECT_NEAR(oracle::kahan_norm(n), 1.0, 1e-6);
}

TEST(VectorMathTest, NormalizeRejectsZeroAndNonFinite) {
    EXPECT_EQ(code_of([] { l2_normalize(std::vector<float>{0.0f, 0.0f}); }), ErrorCode::ZeroVector);
    EXPECT_EQ(code_of([] { l2_normalize(std::vector<float>{1e-20f, 0.0f}); }), ErrorCode::ZeroVector);
    EXPECT_EQ(code_of([] { l2_normalize(std::vector<float>{std::nanf(""), 1.0f}); }), ErrorCode::NonFinite);
    EXPECT_EQ(code_of([] { l2_normalize(std::vector<float>{INFINITY, 1.0f}); }), ErrorCode::NonFinite);
}

TEST(VectorMathTest, DotOnBasisVectors) {
    const auto e1 = testkit::basis(3, 0);
    const auto e2 = testkit::basis(3, 1);
    EXPECT_EQ(dot(e1, e1), 1.0f);
    EXPECT_EQ(dot(e1, e2), 0.0f);
}

TEST(VectorMathTest, DotAgainstDoubleLoopOracle) {
    std::mt19937_64 rng(42);
    const auto a = testkit::random_unit(rng, 128);
    const auto b = testkit::random_unit(rng, 128);
    EXPECT_NEAR(dot(a, b), oracle::dot(a, b), 1e-6);
}

TEST(VectorMathTest, DotIsDeterministicAcrossLengths) {
    std::mt19937_64 rng(1);
    for (std::size_t d = 1; d <= 19; ++d) {
        const auto a = testkit::random_vector(rng, d);
        const auto b = testkit::random_vector(rng, d);
        EXPECT_EQ(dot(a, b), dot_unchecked(a.data(), b.data(), d));
        EXPECT_NEAR(dot(a, b), oracle::dot(a, b), 1e-5 * d);
    }
}

TEST(VectorMathTest, DotDimensionMismatch) {
    EXPECT_EQ(code_of([] { dot(std::vector<float>{1, 2}, std::vector<float>{1, 2, 3}); }),
              ErrorCode::DimensionMismatch);
}

TEST(VectorMathTest, EstimateMemory) {
    EXPECT_EQ(estimate_memory(1, 1030, 128, 2), 263680u);
    EXPECT_EQ(estimate_memory(1000000, 1030, 128, 2), 263680000000u);
    EXPECT_EQ(estimate_memory(0, 1030, 128, 2), 0u);
    // within 3% of 256 KiB and of 256 GB, compared in exact integers:
    // the second sits on the boundary (7.68e9 = 3% of 256e9)
    EXPECT_LE(100u * (263680u - 262144u), 3u * 262144u);
    EXPECT_LE(100u * (263680000000u - 256000000000u), 3u * 256000000000u);
    const auto max = std::numeric_limits<std::uint64_t>::max();
    EXPECT_EQ(code_of([&] { estimate_memory(max, 2, 1, 1); }), ErrorCode::Overflow);
    EXPECT_EQ(code_of([&] { estimate_memory(1u << 20, 1u << 20, 1u << 20, 1u << 20); }), ErrorCode::Overflow);
}

TEST(TypesTest, PageKeyOrdering) {
    EXPECT_LT((PageKey{"a", 9}), (PageKey{"b", 0}));
    EXPECT_LT((PageKey{"a", 1}), (PageKey{"a", 2}));
    EXPECT_LT((PatchKey{{"a", 1}, 5}), (PatchKey{{"a", 2}, 0}));
    EXPECT_EQ(to_string(PageKey{"doc", 3}), "doc#3");
}

TEST(TypesTest, MatrixFromRows) {
    const auto m = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    EXPECT_EQ(m.rows(), 3u);
    EXPECT_EQ(m.cols(), 2u);
    EXPECT_EQ(m.row(1)[0], 3.0f);
    EXPECT_EQ(code_of([] { Matrix::from_rows({{1, 2}, {3}}); }), ErrorCode::DimensionMismatch);

    Matrix grown(0, 2);
    grown.append_row(std::vector<float>{1, 2});
    EXPECT_EQ(grown.rows(), 1u);
    EXPECT_EQ(code_of([&] { grown.append_row(std::vector<float>{1}); }), ErrorCode::DimensionMismatch);
}

TEST(TypesTest, EnumParsing) {
    EXPECT_EQ(parse_tau_mode("absolute"), TauMode::Absolute);
    EXPECT_EQ(parse_tau_mode("relative_to_top"), TauMode::RelativeToTop);
    EXPECT_EQ(parse_first_pass("pooled"), FirstPass::Pooled);
    EXPECT_EQ(to_string(FirstPass::Exact), "exact");
    EXPECT_EQ(code_of([] { parse_first_pass("ivf"); }), ErrorCode::BadParams);
}

TEST(TypesTest, RetrievalConfigValidation) {
    RetrievalConfig cfg;
    EXPECT_NO_THROW(cfg.validate());

    cfg.k_token = 0;
    EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::BadParams);
    cfg = {};
    cfg.tau = 1.5;
    EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::BadParams);
    cfg = {};
    cfg.k_token = 100;
    EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::BadParams);  // ef_search 64 < k_token
    cfg.first_pass = FirstPass::Exact;
    EXPECT_NO_THROW(cfg.validate());
    cfg = {};
    cfg.top_k = 0;
    EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::BadParams);
}

TEST(ErrorTest, MessageCarriesCodeName) {
    const Error e(ErrorCode::MissingPatch, "page x#1 lacks patch 2");
    EXPECT_EQ(e.code(), ErrorCode::MissingPatch);
    EXPECT_STREQ(e.what(), "MissingPatch: page x#1 lacks patch 2");
}
