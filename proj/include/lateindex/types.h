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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lateindex {

/// Identity of one page: an opaque document id plus a page number.
/// Ordering (doc_id lexicographic, then page_number) is the global
/// tie-breaker for every ranking in the library.
struct PageKey {
    std::string doc_id;
    std::uint32_t page_number = 0;

    auto operator<=>(const PageKey&) const = default;
    bool operator==(const PageKey&) const = default;
};

/// "doc_id#page_number", the page identity used in run files and sources.
std::string to_string(const PageKey& key);

struct PatchKey {
    PageKey page;
    std::uint32_t patch_number = 0;

    auto operator<=>(const PatchKey&) const = default;
    bool operator==(const PatchKey&) const = default;
};

/// Read-only view over a dense row-major matrix.
struct MatrixView {
    std::span<const float> data;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::span<const float> row(std::size_t i) const { return data.subspan(i * cols, cols); }
};

/// Dense row-major float matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<float> data);

    /// Builds from nested rows; throws DimensionMismatch on ragged input.
    static Matrix from_rows(const std::vector<std::vector<float>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    std::span<float> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const float> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    const std::vector<float>& values() const { return data_; }
    std::vector<float>& values() { return data_; }

    MatrixView view() const { return {data_, rows_, cols_}; }

    void append_row(std::span<const float> values);

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<float> data_;
};

struct PatchRecord {
    PatchKey key;
    std::vector<float> vector;
};

/// A page reconstructed for re-ranking: row j holds patch j.
struct PageEmbedding {
    PageKey page;
    Matrix matrix;
};

/// Query token vectors, one row per token.
struct QueryEmbedding {
    std::string query_id;
    Matrix matrix;
};

enum class TauMode { Absolute, RelativeToTop };
enum class FirstPass { Hnsw, Exact, Pooled };

std::string_view to_string(TauMode mode);
std::string_view to_string(FirstPass pass);
TauMode parse_tau_mode(std::string_view text);
FirstPass parse_first_pass(std::string_view text);

struct RetrievalConfig {
    std::uint32_t k_token = 10;
    /// Unset disables thresholding: every first-pass hit contributes its page.
    std::optional<double> tau = 0.9;
    TauMode tau_mode = TauMode::Absolute;
    FirstPass first_pass = FirstPass::Hnsw;
    std::uint32_t ef_search = 64;
    std::uint32_t top_k = 10;
    bool normalize_on_ingest = true;
    /// Candidate sets larger than this raise CandidateOverflow.
    std::size_t candidate_cap = 1024;

    /// Throws BadParams when the invariants do not hold.
    void validate() const;
};

struct RankedEntry {
    PageKey page;
    float score = 0.0f;
    std::uint32_t rank = 0;

    bool operator==(const RankedEntry&) const = default;
};

struct RankedResult {
    std::vector<RankedEntry> entries;
    std::size_t candidates_examined = 0;
    std::size_t per_token_hits = 0;
};

}  // namespace lateindex
