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

#include "lateindex/types.h"

namespace lateindex {

/// MVEC: a flat little-endian file of f32 vectors.
///
///   "MVEC" | version u8 = 1 | scalar_type u8 = 0 (f32) | reserved u16 = 0 |
///   dim u32 | vector_count u64 | vector_count x dim f32, row-major
inline constexpr std::size_t kMvecHeaderBytes = 20;
inline constexpr std::uint8_t kMvecVersion = 1;

/// Throws NonFinite and IoFailure.
void write_mvec(const Matrix& matrix, const std::string& path);

/// Throws IoFailure, CorruptFile (magic, scalar type, or size) and
/// VersionMismatch.
Matrix read_mvec(const std::string& path);

std::vector<std::uint8_t> encode_mvec(const Matrix& matrix);
Matrix decode_mvec(std::span<const std::uint8_t> bytes);

}  // namespace lateindex
