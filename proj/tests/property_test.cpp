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

#include "support/properties.h"

using namespace lateindex::testkit;

namespace {

constexpr std::size_t kCases = 200;

void expect_holds(const PropertyResult& r) {
    EXPECT_GE(r.cases, kCases);
    EXPECT_EQ(r.failures, 0u) << r.name << ": first failure at " << r.first_failure;
}

}  // namespace

TEST(PropertyTest, MaxSimPermutationInvariance) { expect_holds(maxsim_permutation_invariance(kCases)); }
TEST(PropertyTest, MaxSimMonotoneUnderPatchAddition) { expect_holds(maxsim_monotone_under_patch_addition(kCases)); }
TEST(PropertyTest, QueryScaleArgsortInvariance) { expect_holds(query_scale_argsort_invariance(kCases)); }
TEST(PropertyTest, CandidatesMonotoneInTau) { expect_holds(candidates_monotone_in_tau(kCases)); }
TEST(PropertyTest, CandidatesMonotoneInKToken) { expect_holds(candidates_monotone_in_k_token(kCases)); }
TEST(PropertyTest, RecallMonotoneInK) { expect_holds(recall_monotone_in_k(kCases)); }
TEST(PropertyTest, MvecRoundTripBitwise) { expect_holds(mvec_round_trip_bitwise(kCases)); }
