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

#include "lateindex/vector_math.h"

#include <cmath>
#include <string>

#include "lateindex/error.h"

namespace lateindex {

float dot_unchecked(const float* u, const float* v, std::size_t dim) noexcept {
    // Four independent lanes, folded in a fixed order.
    float a0 = 0.0f, a1 = 0.0f, a2 = 0.0f, a3 = 0.0f;
    std::size_t i = 0;
    for (; i + 4 <= dim; i += 4) {
        a0 += u[i] * v[i];
        a1 += u[i + 1] * v[i + 1];
        a2 += u[i + 2] * v[i + 2];
        a3 += u[i + 3] * v[i + 3];
    }
    float tail = 0.0f;
    for (; i < dim; ++i) {
        tail += u[i] * v[i];
    }
    return ((a0 + a1) + (a2 + a3)) + tail;
}

float dot(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "dot of lengths " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
    }
    return dot_unchecked(u.data(), v.data(), u.size());
}

void check_finite(std::span<const float> v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw Error(ErrorCode::NonFinite, "entry " + std::to_string(i) + " is not finite");
        }
    }
}

float l2_norm(std::span<const float> v) {
    double sum = 0.0;
    for (float x : v) {
        sum += static_cast<double>(x) * x;
    }
    return static_cast<float>(std::sqrt(sum));
}

std::vector<float> l2_normalize(std::span<const float> v) {
    if (v.empty()) {
        throw Error(ErrorCode::ZeroVector, "empty vector");
    }
    check_finite(v);
    double sum = 0.0;
    for (float x : v) {
        sum += static_cast<double>(x) * x;
    }
    const double norm = std::sqrt(sum);
    if (norm < 1e-12) {
        throw Error(ErrorCode::ZeroVector, "norm below 1e-12");
    }
    std::vector<float> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = static_cast<float>(v[i] / norm);
    }
    return out;
}

std::uint64_t estimate_memory(std::uint64_t pages, std::uint64_t patches, std::uint64_t dim,
                              std::uint64_t bytes_per_scalar) {
    std::uint64_t total = 0;
    if (__builtin_mul_overflow(pages, patches, &total) || __builtin_mul_overflow(total, dim, &total) ||
        __builtin_mul_overflow(total, bytes_per_scalar, &total)) {
        throw Error(ErrorCode::Overflow, "memory estimate exceeds 64 bits");
    }
    return total;
}

}  // namespace lateindex
