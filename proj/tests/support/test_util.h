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

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "lateindex/patch_store.h"
#include "lateindex/types.h"

namespace lateindex::testkit {

inline std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<float> normal(0.0f, 1.0f);
    std::vector<float> v(dim);
    for (auto& x : v) {
        x = normal(rng);
    }
    return v;
}

inline std::vector<float> random_unit(std::mt19937_64& rng, std::size_t dim) {
    auto v = random_vector(rng, dim);
    double n = 0.0;
    for (float x : v) {
        n += double{x} * x;
    }
    for (auto& x : v) {
        x = static_cast<float>(x / std::sqrt(n));
    }
    return v;
}

inline std::vector<float> basis(std::size_t dim, std::size_t i) {
    std::vector<float> v(dim, 0.0f);
    v[i] = 1.0f;
    return v;
}

/// `pages` pages of `patches` random unit rows; doc ids "d0", "d1", ...
inline std::vector<PatchRecord> random_records(std::mt19937_64& rng, std::size_t pages, std::size_t patches,
                                               std::size_t dim) {
    std::vector<PatchRecord> out;
    for (std::size_t p = 0; p < pages; ++p) {
        for (std::size_t j = 0; j < patches; ++j) {
            out.push_back({{{"d" + std::to_string(p / 10), static_cast<std::uint32_t>(p % 10)},
                            static_cast<std::uint32_t>(j)},
                           random_unit(rng, dim)});
        }
    }
    return out;
}

inline Matrix random_query(std::mt19937_64& rng, std::size_t tokens, std::size_t dim) {
    Matrix m(0, dim);
    for (std::size_t t = 0; t < tokens; ++t) {
        m.append_row(random_unit(rng, dim));
    }
    return m;
}

inline std::vector<std::vector<float>> rows_of(MatrixView view) {
    std::vector<std::vector<float>> rows;
    for (std::size_t i = 0; i < view.rows; ++i) {
        auto r = view.row(i);
        rows.emplace_back(r.begin(), r.end());
    }
    return rows;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("lateindex-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

}  // namespace lateindex::testkit
