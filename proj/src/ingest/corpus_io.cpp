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

#include "lateindex/corpus_io.h"

#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "lateindex/error.h"
#include "lateindex/mvec.h"
#include "lateindex/vector_math.h"

namespace lateindex {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

[[noreturn]] void malformed(const std::string& path, std::size_t line, const std::string& why) {
    throw Error(ErrorCode::MalformedLine, path + ":" + std::to_string(line) + ": " + why);
}

/// Calls fn(line_number, text) for every non-blank line.
template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
    if (path.empty()) {
        throw Error(ErrorCode::IoFailure, "empty path");
    }
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path);
    }
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        fn(n, line);
    }
    if (in.bad()) {
        throw Error(ErrorCode::IoFailure, "read failed for " + path);
    }
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        throw Error(ErrorCode::IoFailure, "empty path");
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path + " for writing");
    }
    out << text;
    out.flush();
    if (!out) {
        throw Error(ErrorCode::IoFailure, "write failed for " + path);
    }
}

json parse_object(const std::string& path, std::size_t n, const std::string& line,
                  std::initializer_list<const char*> fields) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        malformed(path, n, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object() || obj.size() != fields.size()) {
        malformed(path, n, "expected an object with exactly " + std::to_string(fields.size()) + " fields");
    }
    for (const char* f : fields) {
        if (!obj.contains(f)) {
            malformed(path, n, std::string("missing field '") + f + "'");
        }
    }
    return obj;
}

std::string string_field(const json& obj, const char* name, const std::string& path, std::size_t n) {
    const auto& v = obj.at(name);
    if (!v.is_string()) {
        malformed(path, n, std::string("'") + name + "' must be a string");
    }
    return v.get<std::string>();
}

std::uint64_t uint_field(const json& obj, const char* name, std::uint64_t max, const std::string& path,
                         std::size_t n) {
    const auto& v = obj.at(name);
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() > max) {
        malformed(path, n, std::string("'") + name + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::string resolve(const std::string& base_dir, const std::string& file) {
    fs::path p(file);
    if (p.is_relative() && !base_dir.empty()) {
        p = fs::path(base_dir) / p;
    }
    return p.string();
}

std::string parent_dir(const std::string& path) {
    return fs::path(path).parent_path().string();
}

/// Loads each referenced MVEC file once.
class MvecCache {
public:
    const Matrix& get(const std::string& path) {
        auto it = files_.find(path);
        if (it == files_.end()) {
            it = files_.emplace(path, read_mvec(path)).first;
        }
        return it->second;
    }

private:
    std::unordered_map<std::string, Matrix> files_;
};

const Matrix& checked_range(MvecCache& cache, const std::string& file, std::uint64_t offset, std::uint64_t count,
                            const std::string& what) {
    const Matrix& m = cache.get(file);
    if (offset > m.rows() || count > m.rows() - offset) {
        throw Error(ErrorCode::CorruptFile, what + " references rows [" + std::to_string(offset) + ", " +
                                                std::to_string(offset + count) + ") but " + file + " has " +
                                                std::to_string(m.rows()));
    }
    return m;
}

}  // namespace

CorpusManifest read_manifest(const std::string& path) {
    CorpusManifest manifest;
    manifest.base_dir = parent_dir(path);
    for_each_line(path, [&](std::size_t n, const std::string& line) {
        auto obj = parse_object(path, n, line, {"doc_id", "page", "patches", "file", "offset_vectors"});
        ManifestEntry e;
        e.doc_id = string_field(obj, "doc_id", path, n);
        e.page = static_cast<std::uint32_t>(uint_field(obj, "page", std::numeric_limits<std::uint32_t>::max(), path, n));
        e.patches =
            static_cast<std::uint32_t>(uint_field(obj, "patches", std::numeric_limits<std::uint32_t>::max(), path, n));
        e.file = string_field(obj, "file", path, n);
        e.offset_vectors = uint_field(obj, "offset_vectors", std::numeric_limits<std::uint64_t>::max(), path, n);
        if (e.doc_id.empty()) {
            malformed(path, n, "'doc_id' must be non-empty");
        }
        if (e.patches == 0) {
            malformed(path, n, "'patches' must be >= 1");
        }
        manifest.entries.push_back(std::move(e));
    });
    return manifest;
}

void write_manifest(const CorpusManifest& manifest, const std::string& path) {
    std::string text;
    for (const auto& e : manifest.entries) {
        json obj = {{"doc_id", e.doc_id},
                    {"page", e.page},
                    {"patches", e.patches},
                    {"file", e.file},
                    {"offset_vectors", e.offset_vectors}};
        text += obj.dump();
        text += '\n';
    }
    write_text(path, text);
}

std::vector<PatchRecord> ingest_corpus(const CorpusManifest& manifest, bool normalize) {
    MvecCache cache;
    std::set<PageKey> seen;
    std::vector<PatchRecord> records;
    std::size_t dim = 0;
    for (const auto& e : manifest.entries) {
        PageKey key{e.doc_id, e.page};
        if (!seen.insert(key).second) {
            throw Error(ErrorCode::DuplicatePage, to_string(key));
        }
        const std::string file = resolve(manifest.base_dir, e.file);
        const Matrix& m = checked_range(cache, file, e.offset_vectors, e.patches, to_string(key));
        if (dim == 0) {
            dim = m.cols();
        } else if (m.cols() != dim) {
            throw Error(ErrorCode::DimensionMismatch,
                        file + " has dimension " + std::to_string(m.cols()) + ", corpus uses " + std::to_string(dim));
        }
        for (std::uint32_t j = 0; j < e.patches; ++j) {
            auto row = m.row(e.offset_vectors + j);
            PatchRecord rec{{key, j}, {}};
            if (normalize) {
                rec.vector = l2_normalize(row);
            } else {
                rec.vector.assign(row.begin(), row.end());
            }
            records.push_back(std::move(rec));
        }
    }
    return records;
}

std::vector<QueryEntry> read_query_entries(const std::string& path) {
    std::vector<QueryEntry> out;
    for_each_line(path, [&](std::size_t n, const std::string& line) {
        auto obj = parse_object(path, n, line, {"query_id", "file", "offset_vectors", "tokens"});
        QueryEntry q;
        q.query_id = string_field(obj, "query_id", path, n);
        q.file = string_field(obj, "file", path, n);
        q.offset_vectors = uint_field(obj, "offset_vectors", std::numeric_limits<std::uint64_t>::max(), path, n);
        q.tokens =
            static_cast<std::uint32_t>(uint_field(obj, "tokens", std::numeric_limits<std::uint32_t>::max(), path, n));
        if (q.query_id.empty() || q.query_id.find_first_of(" \t") != std::string::npos) {
            malformed(path, n, "'query_id' must be non-empty without whitespace");
        }
        out.push_back(std::move(q));
    });
    return out;
}

void write_query_entries(const std::vector<QueryEntry>& entries, const std::string& path) {
    std::string text;
    for (const auto& q : entries) {
        json obj = {{"query_id", q.query_id}, {"file", q.file}, {"offset_vectors", q.offset_vectors}, {"tokens", q.tokens}};
        text += obj.dump();
        text += '\n';
    }
    write_text(path, text);
}

std::vector<QueryEmbedding> read_queries(const std::string& path) {
    const std::string base = parent_dir(path);
    MvecCache cache;
    std::vector<QueryEmbedding> out;
    for (const auto& q : read_query_entries(path)) {
        const std::string file = resolve(base, q.file);
        const Matrix& m = checked_range(cache, file, q.offset_vectors, q.tokens, "query " + q.query_id);
        const auto first = m.values().begin() + static_cast<std::ptrdiff_t>(q.offset_vectors * m.cols());
        std::vector<float> values(first, first + static_cast<std::ptrdiff_t>(std::size_t{q.tokens} * m.cols()));
        out.push_back({q.query_id, Matrix(q.tokens, m.cols(), std::move(values))});
    }
    return out;
}

Qrels read_qrels(const std::string& path) {
    Qrels qrels;
    for_each_line(path, [&](std::size_t n, const std::string& line) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, '\t');) {
            fields.push_back(f);
        }
        if (fields.size() != 4) {
            malformed(path, n, "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
        }
        std::uint32_t page = 0;
        int relevance = 0;
        try {
            std::size_t used = 0;
            const unsigned long parsed = std::stoul(fields[2], &used);
            if (used != fields[2].size() || parsed > std::numeric_limits<std::uint32_t>::max()) {
                throw std::invalid_argument("page");
            }
            page = static_cast<std::uint32_t>(parsed);
            relevance = std::stoi(fields[3], &used);
            if (used != fields[3].size()) {
                throw std::invalid_argument("relevance");
            }
        } catch (const std::exception&) {
            malformed(path, n, "page and relevance must be integers");
        }
        if (fields[0].empty() || fields[1].empty()) {
            malformed(path, n, "empty query_id or doc_id");
        }
        qrels[fields[0]][PageKey{fields[1], page}] = relevance;
    });
    return qrels;
}

void write_qrels(const Qrels& qrels, const std::string& path) {
    std::string text;
    for (const auto& [query_id, pages] : qrels) {
        for (const auto& [page, relevance] : pages) {
            text += query_id + '\t' + page.doc_id + '\t' + std::to_string(page.page_number) + '\t' +
                    std::to_string(relevance) + '\n';
        }
    }
    write_text(path, text);
}

}  // namespace lateindex
