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

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lateindex/types.h"

namespace lateindex {

/// An outbound HTTP JSON endpoint, e.g. "http://127.0.0.1:8081/embed".
struct EndpointConfig {
    std::string url;
    std::chrono::milliseconds timeout{30000};
};

/// POSTs `body` and parses the JSON reply. Throws EndpointUnconfigured
/// (empty url), TransportFailure (connection, timeout, non-2xx status) and
/// BadResponse (reply is not JSON). Only plain http:// is supported.
nlohmann::json post_json(const EndpointConfig& endpoint, const nlohmann::json& body);

/// Sends {"texts": [...]} and expects {"embeddings": [[[number]]]}: one
/// tokens x d matrix per text. Throws EndpointUnconfigured when `endpoint`
/// is empty, TransportFailure, and BadResponse for a wrong count, ragged or
/// empty shapes, mixed d, or non-finite values.
std::vector<QueryEmbedding> embed_remote(const std::vector<std::string>& texts,
                                         const std::optional<EndpointConfig>& endpoint);

}  // namespace lateindex
