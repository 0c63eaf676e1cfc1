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

#include "lateindex/index_io.h"

#include <algorithm>
#include <cstring>
#include <limits>
#include <string>

#include "lateindex/detail/byte_io.h"
#include "lateindex/error.h"

namespace lateindex {
namespace {

constexpr char kMagic[4] = {'L', 'I', 'D', 'X'};
constexpr std::uint16_t kFlagNormalized = 1;

// magic + version + flags + d + rows + pages
constexpr std::size_t kHeaderBytes = 4 + 2 + 2 + 4 + 8 + 8;

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::CorruptIndex, what); }

}  // namespace

std::vector<std::uint8_t> encode_index(const PatchStore& store, const HnswGraph& graph) {
    if (graph.size() != store.row_count()) {
        throw Error(ErrorCode::BadParams, "graph does not match store");
    }
    detail::ByteWriter w;
    w.put_bytes({kMagic, 4});
    w.put<std::uint16_t>(kIndexFormatVersion);
    w.put<std::uint16_t>(store.normalized() ? kFlagNormalized : 0);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(store.dim()));
    w.put<std::uint64_t>(store.row_count());
    w.put<std::uint64_t>(store.page_count());
    for (const auto& page : store.pages()) {
        if (page.key.doc_id.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw Error(ErrorCode::BadParams, "doc_id longer than 65535 bytes");
        }
        w.put<std::uint16_t>(static_cast<std::uint16_t>(page.key.doc_id.size()));
        w.put_bytes(page.key.doc_id);
        w.put<std::uint32_t>(page.key.page_number);
        w.put<std::uint64_t>(page.first_row);
        w.put<std::uint32_t>(page.patch_count);
    }
    w.put_floats(store.vectors());

    w.put<std::uint64_t>(graph.entry_point());
    w.put<std::uint8_t>(graph.max_level());
    for (HnswGraph::NodeId node = 0; node < graph.size(); ++node) {
        const std::uint8_t level = graph.level(node);
        w.put<std::uint8_t>(level);
        for (std::size_t layer = 0; layer <= level; ++layer) {
            auto nbrs = graph.neighbors(node, layer);
            w.put<std::uint16_t>(static_cast<std::uint16_t>(nbrs.size()));
            for (auto n : nbrs) {
                w.put<std::uint64_t>(n);
            }
        }
    }
    const std::uint32_t crc = detail::crc32c(w.bytes());
    w.put<std::uint32_t>(crc);
    return std::move(w.bytes());
}

void save_index(const PatchStore& store, const HnswGraph& graph, const std::string& path) {
    detail::write_file(path, encode_index(store, graph));
}

LoadedIndex decode_index(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderBytes + 4) {
        corrupt("file too short (" + std::to_string(bytes.size()) + " bytes)");
    }
    detail::ByteReader r(bytes.first(bytes.size() - 4), ErrorCode::CorruptIndex);
    if (r.get_string(4) != std::string_view(kMagic, 4)) {
        corrupt("bad magic");
    }
    const auto version = r.get<std::uint16_t>();
    if (version != kIndexFormatVersion) {
        throw Error(ErrorCode::VersionMismatch,
                    "index format version " + std::to_string(version) + ", expected " +
                        std::to_string(kIndexFormatVersion));
    }
    std::uint32_t stored_crc = 0;
    std::memcpy(&stored_crc, bytes.data() + bytes.size() - 4, 4);
    if (detail::crc32c(bytes.first(bytes.size() - 4)) != stored_crc) {
        corrupt("checksum mismatch");
    }

    const auto flags = r.get<std::uint16_t>();
    if ((flags & ~kFlagNormalized) != 0) {
        corrupt("unknown flag bits");
    }
    const auto dim = r.get<std::uint32_t>();
    const auto rows = r.get<std::uint64_t>();
    const auto page_count = r.get<std::uint64_t>();
    if (dim == 0 || rows == 0 || page_count == 0 || page_count > rows) {
        corrupt("empty or inconsistent header counts");
    }
    if (rows > std::numeric_limits<HnswGraph::NodeId>::max() || rows > r.remaining() / (4ull * dim)) {
        corrupt("row count exceeds payload");
    }

    std::vector<PageRange> pages;
    pages.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(page_count, r.remaining() / 18)));
    std::uint64_t next_row = 0;
    for (std::uint64_t p = 0; p < page_count; ++p) {
        PageRange range;
        range.key.doc_id = r.get_string(r.get<std::uint16_t>());
        range.key.page_number = r.get<std::uint32_t>();
        range.first_row = r.get<std::uint64_t>();
        range.patch_count = r.get<std::uint32_t>();
        if (range.key.doc_id.empty() || range.patch_count == 0 || range.first_row != next_row ||
            (!pages.empty() && !(pages.back().key < range.key))) {
            corrupt("page table entry " + std::to_string(p) + " is inconsistent");
        }
        next_row += range.patch_count;
        pages.push_back(std::move(range));
    }
    if (next_row != rows) {
        corrupt("page table does not cover every row");
    }

    std::vector<float> vectors(rows * dim);
    r.get_floats(vectors);

    const auto entry = r.get<std::uint64_t>();
    const auto max_level = r.get<std::uint8_t>();
    std::vector<std::vector<std::vector<HnswGraph::NodeId>>> links(rows);
    for (std::uint64_t node = 0; node < rows; ++node) {
        const auto level = r.get<std::uint8_t>();
        if (level > max_level) {
            corrupt("node level above graph max level");
        }
        links[node].resize(std::size_t{level} + 1);
        for (auto& layer : links[node]) {
            const auto count = r.get<std::uint16_t>();
            layer.resize(count);
            for (auto& n : layer) {
                const auto id = r.get<std::uint64_t>();
                if (id >= rows) {
                    corrupt("neighbor id out of range");
                }
                n = static_cast<HnswGraph::NodeId>(id);
            }
        }
    }
    for (const auto& node_links : links) {
        for (std::size_t layer = 0; layer < node_links.size(); ++layer) {
            for (auto n : node_links[layer]) {
                if (links[n].size() <= layer) {
                    corrupt("edge to a node absent from its layer");
                }
            }
        }
    }
    if (entry >= rows || links[entry].size() != std::size_t{max_level} + 1) {
        corrupt("bad entry point");
    }
    if (r.remaining() != 0) {
        corrupt("trailing bytes before checksum");
    }

    PatchStore store(dim, (flags & kFlagNormalized) != 0, std::move(pages), std::move(vectors));
    HnswGraph graph(static_cast<HnswGraph::NodeId>(entry), max_level, std::move(links));
    return {std::move(store), std::move(graph)};
}

LoadedIndex load_index(const std::string& path) {
    const auto bytes = detail::read_file(path);
    return decode_index(bytes);
}

}  // namespace lateindex
