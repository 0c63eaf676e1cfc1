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

namespace lateindex {

/// Inner product with a fixed accumulation order. Both retrieval passes
/// score through this kernel, so equal inputs always give equal bits.
/// Throws DimensionMismatch when the lengths differ.
float dot(std::span<const float> u, std::span<const float> v);

/// Unchecked variant for hot loops where the caller guarantees equal lengths.
float dot_unchecked(const float* u, const float* v, std::size_t dim) noexcept;

float l2_norm(std::span<const float> v);

/// Unit-length copy of `v`. Throws ZeroVector if ||v|| < 1e-12 and
/// NonFinite if any entry is NaN or infinite.
std::vector<float> l2_normalize(std::span<const float> v);

void check_finite(std::span<const float> v);

/// Bytes needed to hold `pages` pages of `patches` x `dim` scalars of
/// `bytes_per_scalar` bytes each, as in the exhaustive in-memory late
/// interaction baseline. Throws Overflow if the product does not fit.
std::uint64_t estimate_memory(std::uint64_t pages, std::uint64_t patches, std::uint64_t dim,
                              std::uint64_t bytes_per_scalar);

}  // namespace lateindex
