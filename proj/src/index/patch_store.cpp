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

#include "lateindex/patch_store.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "lateindex/error.h"
#include "lateindex/vector_math.h"

namespace lateindex {

PatchStore::PatchStore(std::size_t dim, bool normalized, std::vector<PageRange> pages, std::vector<float> vectors)
    : dim_(dim), normalized_(normalized), pages_(std::move(pages)), vectors_(std::move(vectors)) {
    row_page_.resize(row_count());
    for (std::size_t p = 0; p < pages_.size(); ++p) {
        const auto& range = pages_[p];
        std::fill_n(row_page_.begin() + static_cast<std::ptrdiff_t>(range.first_row), range.patch_count,
                    static_cast<std::uint32_t>(p));
        page_lookup_.emplace(range.key, p);
    }
}

std::optional<std::size_t> PatchStore::find_page(const PageKey& key) const {
    auto it = page_lookup_.find(key);
    if (it == page_lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

PatchKey PatchStore::patch_key(RowId id) const {
    const auto& range = pages_[row_page_[id]];
    return {range.key, static_cast<std::uint32_t>(id - range.first_row)};
}

MatrixView PatchStore::page_view(std::size_t page_index) const {
    const auto& range = pages_[page_index];
    return {std::span<const float>(vectors_).subspan(range.first_row * dim_, std::size_t{range.patch_count} * dim_),
            range.patch_count, dim_};
}

PatchStore build_store(std::span<const PatchRecord> records, bool normalize) {
    if (records.empty()) {
        throw Error(ErrorCode::EmptyStore, "no patch records supplied");
    }
    const std::size_t dim = records.front().vector.size();
    if (dim == 0) {
        throw Error(ErrorCode::DimensionMismatch, "patch vectors must be non-empty");
    }

    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return records[a].key < records[b].key; });

    std::vector<PageRange> pages;
    std::vector<float> vectors;
    vectors.reserve(records.size() * dim);

    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& rec = records[order[i]];
        if (rec.vector.size() != dim) {
            throw Error(ErrorCode::DimensionMismatch, "patch " + to_string(rec.key.page) + "/" +
                                                          std::to_string(rec.key.patch_number) + " has dimension " +
                                                          std::to_string(rec.vector.size()) + ", expected " +
                                                          std::to_string(dim));
        }
        if (i > 0 && records[order[i - 1]].key == rec.key) {
            throw Error(ErrorCode::DuplicatePatch,
                        to_string(rec.key.page) + " patch " + std::to_string(rec.key.patch_number));
        }
        if (pages.empty() || pages.back().key != rec.key.page) {
            if (rec.key.page.doc_id.empty()) {
                throw Error(ErrorCode::BadParams, "doc_id must be non-empty");
            }
            pages.push_back({rec.key.page, i, 0});
        }
        auto& range = pages.back();
        if (rec.key.patch_number != range.patch_count) {
            throw Error(ErrorCode::MissingPatch, to_string(range.key) + " lacks patch " +
                                                     std::to_string(range.patch_count));
        }
        ++range.patch_count;

        if (normalize) {
            auto unit = l2_normalize(rec.vector);
            vectors.insert(vectors.end(), unit.begin(), unit.end());
        } else {
            check_finite(rec.vector);
            vectors.insert(vectors.end(), rec.vector.begin(), rec.vector.end());
        }
    }
    return PatchStore(dim, normalize, std::move(pages), std::move(vectors));
}

std::vector<PatchRecord> fetch_page_patches(const PatchStore& store, const PageKey& page) {
    auto index = store.find_page(page);
    if (!index) {
        throw Error(ErrorCode::UnknownPage, to_string(page));
    }
    const auto& range = store.page(*index);
    std::vector<PatchRecord> out;
    out.reserve(range.patch_count);
    for (std::uint32_t j = 0; j < range.patch_count; ++j) {
        auto row = store.row(range.first_row + j);
        out.push_back({{range.key, j}, std::vector<float>(row.begin(), row.end())});
    }
    return out;
}

}  // namespace lateindex
