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

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "lateindex/types.h"

namespace lateindex::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one subcommand (gen-synthetic, ingest, query, eval, bench, serve).
/// `args` excludes the program name. Machine-readable output goes to `out`,
/// progress and diagnostics to `err`. Returns 0 on success, 1 on a usage
/// error, 2 on a runtime failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Overlays the keys present in `j` (same names as RetrievalConfig fields)
/// onto `cfg`. Throws BadParams for unknown keys or bad values.
RetrievalConfig retrieval_config_from_json(const nlohmann::json& j, RetrievalConfig cfg = {});
nlohmann::json retrieval_config_to_json(const RetrievalConfig& cfg);

}  // namespace lateindex::cli
