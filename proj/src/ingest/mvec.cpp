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

#include "lateindex/mvec.h"

#include "lateindex/detail/byte_io.h"
#include "lateindex/error.h"
#include "lateindex/vector_math.h"

namespace lateindex {

std::vector<std::uint8_t> encode_mvec(const Matrix& matrix) {
    check_finite(matrix.values());
    detail::ByteWriter w;
    w.put_bytes("MVEC");
    w.put<std::uint8_t>(kMvecVersion);
    w.put<std::uint8_t>(0);
    w.put<std::uint16_t>(0);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(matrix.cols()));
    w.put<std::uint64_t>(matrix.rows());
    w.put_floats(matrix.values());
    return std::move(w.bytes());
}

void write_mvec(const Matrix& matrix, const std::string& path) {
    detail::write_file(path, encode_mvec(matrix));
}

Matrix decode_mvec(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes, ErrorCode::CorruptFile);
    if (r.get_string(4) != "MVEC") {
        throw Error(ErrorCode::CorruptFile, "bad magic");
    }
    const auto version = r.get<std::uint8_t>();
    if (version != kMvecVersion) {
        throw Error(ErrorCode::VersionMismatch, "MVEC version " + std::to_string(version));
    }
    if (r.get<std::uint8_t>() != 0) {
        throw Error(ErrorCode::CorruptFile, "unsupported scalar type");
    }
    r.get<std::uint16_t>();
    const auto dim = r.get<std::uint32_t>();
    const auto count = r.get<std::uint64_t>();
    if (dim == 0 && (count != 0 || r.remaining() != 0)) {
        throw Error(ErrorCode::CorruptFile, "zero dimension with a non-empty payload");
    }
    if (dim != 0 && (count > r.remaining() / (4ull * dim) || count * dim * 4 != r.remaining())) {
        throw Error(ErrorCode::CorruptFile, "vector count " + std::to_string(count) + " disagrees with payload of " +
                                                std::to_string(r.remaining()) + " bytes");
    }
    std::vector<float> values(count * dim);
    r.get_floats(values);
    return Matrix(count, dim, std::move(values));
}

Matrix read_mvec(const std::string& path) {
    return decode_mvec(detail::read_file(path));
}

}  // namespace lateindex
