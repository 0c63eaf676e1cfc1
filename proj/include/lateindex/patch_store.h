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
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "lateindex/types.h"

namespace lateindex {

using RowId = std::uint64_t;

/// Contiguous block of rows holding one page's patches 0..patch_count-1.
struct PageRange {
    PageKey key;
    RowId first_row = 0;
    std::uint32_t patch_count = 0;
};

/// Sealed, immutable flat store of every patch vector in a corpus.
///
/// Pages are laid out in PageKey order and, within a page, by ascending
/// patch number. Row order is therefore identical to PatchKey order, which
/// lets every scan break score ties by row id.
class PatchStore {
public:
    PatchStore() = default;

    /// Assembles a store from already-validated parts (used by the loader).
    PatchStore(std::size_t dim, bool normalized, std::vector<PageRange> pages, std::vector<float> vectors);

    std::size_t dim() const { return dim_; }
    bool normalized() const { return normalized_; }
    std::size_t row_count() const { return dim_ == 0 ? 0 : vectors_.size() / dim_; }
    std::size_t page_count() const { return pages_.size(); }
    bool empty() const { return pages_.empty(); }

    std::span<const float> row(RowId id) const { return {vectors_.data() + id * dim_, dim_}; }
    const float* row_ptr(RowId id) const { return vectors_.data() + id * dim_; }
    std::span<const float> vectors() const { return vectors_; }

    std::span<const PageRange> pages() const { return pages_; }
    const PageRange& page(std::size_t page_index) const { return pages_[page_index]; }

    std::optional<std::size_t> find_page(const PageKey& key) const;
    /// Index into pages() of the page owning `id`.
    std::size_t page_of_row(RowId id) const { return row_page_[id]; }
    PatchKey patch_key(RowId id) const;

    /// View over the page's m x d block.
    MatrixView page_view(std::size_t page_index) const;

private:
    std::size_t dim_ = 0;
    bool normalized_ = false;
    std::vector<PageRange> pages_;
    std::vector<float> vectors_;
    std::vector<std::uint32_t> row_page_;
    std::map<PageKey, std::size_t> page_lookup_;
};

/// Validates and seals a set of patch records. Records may arrive in any
/// order. Throws DuplicatePatch, MissingPatch, DimensionMismatch,
/// EmptyStore (no records), and ZeroVector / NonFinite from normalization.
PatchStore build_store(std::span<const PatchRecord> records, bool normalize);

/// All patches of `page` in ascending patch order. Throws UnknownPage.
std::vector<PatchRecord> fetch_page_patches(const PatchStore& store, const PageKey& page);

}  // namespace lateindex
