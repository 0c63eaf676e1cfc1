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

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "lateindex/error.h"

namespace lateindex::detail {

static_assert(std::endian::native == std::endian::little, "on-disk formats assume a little-endian host");

/// Append-only little-endian encoder.
class ByteWriter {
public:
    template <typename T>
    void put(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
        bytes_.insert(bytes_.end(), p, p + sizeof(T));
    }

    void put_bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

    void put_floats(std::span<const float> values) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
        bytes_.insert(bytes_.end(), p, p + values.size_bytes());
    }

    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked little-endian decoder; overruns throw `error`.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, ErrorCode error) : bytes_(bytes), error_(error) {}

    template <typename T>
    T get() {
        T value;
        std::memcpy(&value, take(sizeof(T)).data(), sizeof(T));
        return value;
    }

    std::string get_string(std::size_t n) {
        auto s = take(n);
        return {reinterpret_cast<const char*>(s.data()), s.size()};
    }

    void get_floats(std::span<float> out) { std::memcpy(out.data(), take(out.size_bytes()).data(), out.size_bytes()); }

    std::span<const std::uint8_t> take(std::size_t n) {
        if (n > bytes_.size() - pos_) {
            throw Error(error_, "unexpected end of data at byte " + std::to_string(pos_));
        }
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    ErrorCode error_;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

/// CRC-32C (Castagnoli), as used by iSCSI and ext4.
std::uint32_t crc32c(std::span<const std::uint8_t> bytes);

}  // namespace lateindex::detail
