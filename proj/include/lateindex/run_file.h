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

#include <string>
#include <vector>

#include "lateindex/types.h"

namespace lateindex {

struct RunQuery {
    std::string query_id;
    std::vector<RankedEntry> entries;
};

/// Ranked results for a batch of queries, in query order.
struct RunFile {
    std::string tag;
    std::vector<RunQuery> queries;
};

/// Six space-separated columns per line:
///   query_id Q0 doc_id#page rank score tag
/// Scores are printed with enough digits to round-trip a float exactly.
/// Throws IoFailure and BadParams (identifiers containing whitespace).
void write_run(const RunFile& run, const std::string& path);
std::string format_run(const RunFile& run);

/// Throws IoFailure and MalformedLine (with the offending line number) for a
/// wrong field count, bad numbers, a rank that does not continue 1, 2, ...,
/// increasing scores, or a tag that differs from the first line's.
RunFile read_run(const std::string& path);

}  // namespace lateindex
