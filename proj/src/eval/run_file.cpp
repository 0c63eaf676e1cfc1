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

#include "lateindex/run_file.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "lateindex/error.h"

namespace lateindex {
namespace {

bool has_space(const std::string& s) {
    return s.empty() || s.find_first_of(" \t\r\n") != std::string::npos;
}

[[noreturn]] void malformed(const std::string& path, std::size_t line, const std::string& why) {
    throw Error(ErrorCode::MalformedLine, path + ":" + std::to_string(line) + ": " + why);
}

}  // namespace

std::string format_run(const RunFile& run) {
    if (has_space(run.tag)) {
        throw Error(ErrorCode::BadParams, "run tag must be a non-empty token");
    }
    std::string out;
    char score[32];
    for (const auto& q : run.queries) {
        if (has_space(q.query_id)) {
            throw Error(ErrorCode::BadParams, "query_id '" + q.query_id + "' must be a non-empty token");
        }
        for (const auto& e : q.entries) {
            if (has_space(e.page.doc_id)) {
                throw Error(ErrorCode::BadParams, "doc_id '" + e.page.doc_id + "' must be a non-empty token");
            }
            std::snprintf(score, sizeof(score), "%.9g", static_cast<double>(e.score));
            out += q.query_id + " Q0 " + to_string(e.page) + ' ' + std::to_string(e.rank) + ' ' + score + ' ' +
                   run.tag + '\n';
        }
    }
    return out;
}

void write_run(const RunFile& run, const std::string& path) {
    const std::string text = format_run(run);
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

RunFile read_run(const std::string& path) {
    if (path.empty()) {
        throw Error(ErrorCode::IoFailure, "empty path");
    }
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path);
    }
    RunFile run;
    std::map<std::string, std::size_t> slot_of;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream ss(line);
        std::vector<std::string> f;
        for (std::string tok; ss >> tok;) {
            f.push_back(tok);
        }
        if (f.size() != 6) {
            malformed(path, n, "expected 6 fields, got " + std::to_string(f.size()));
        }
        const auto hash = f[2].rfind('#');
        if (hash == std::string::npos || hash == 0 || hash + 1 == f[2].size()) {
            malformed(path, n, "page identity must be doc_id#page");
        }
        RankedEntry e;
        e.page.doc_id = f[2].substr(0, hash);
        const auto& page_text = f[2];
        auto [pend, perr] = std::from_chars(page_text.data() + hash + 1, page_text.data() + page_text.size(),
                                            e.page.page_number);
        if (perr != std::errc() || pend != page_text.data() + page_text.size()) {
            malformed(path, n, "bad page number in '" + f[2] + "'");
        }
        auto [rend, rerr] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), e.rank);
        if (rerr != std::errc() || rend != f[3].data() + f[3].size()) {
            malformed(path, n, "bad rank '" + f[3] + "'");
        }
        try {
            std::size_t used = 0;
            e.score = std::stof(f[4], &used);
            if (used != f[4].size()) {
                throw std::invalid_argument("score");
            }
        } catch (const std::exception&) {
            malformed(path, n, "bad score '" + f[4] + "'");
        }

        if (run.queries.empty() && slot_of.empty()) {
            run.tag = f[5];
        } else if (f[5] != run.tag) {
            malformed(path, n, "run tag '" + f[5] + "' differs from '" + run.tag + "'");
        }

        auto [it, inserted] = slot_of.try_emplace(f[0], run.queries.size());
        if (inserted) {
            run.queries.push_back({f[0], {}});
        }
        auto& entries = run.queries[it->second].entries;
        const std::uint32_t expected = static_cast<std::uint32_t>(entries.size() + 1);
        if (e.rank != expected) {
            malformed(path, n, "rank " + std::to_string(e.rank) + " for " + f[0] + " breaks contiguity (expected " +
                                   std::to_string(expected) + ")");
        }
        if (!entries.empty() && e.score > entries.back().score) {
            malformed(path, n, "score increases at rank " + std::to_string(e.rank));
        }
        entries.push_back(std::move(e));
    }
    if (in.bad()) {
        throw Error(ErrorCode::IoFailure, "read failed for " + path);
    }
    return run;
}

}  // namespace lateindex
