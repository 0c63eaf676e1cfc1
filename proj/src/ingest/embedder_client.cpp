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

#include "lateindex/embedder_client.h"

#include <cmath>

#include "httplib.h"
#include "lateindex/error.h"

namespace lateindex {
namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
        throw Error(ErrorCode::EndpointUnconfigured, "unsupported endpoint url '" + url + "'");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

nlohmann::json post_json(const EndpointConfig& endpoint, const nlohmann::json& body) {
    if (endpoint.url.empty()) {
        throw Error(ErrorCode::EndpointUnconfigured, "no endpoint url");
    }
    const auto [origin, path] = split_url(endpoint.url);
    httplib::Client client(origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) {
        throw Error(ErrorCode::TransportFailure, endpoint.url + ": " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::TransportFailure, endpoint.url + " returned HTTP " + std::to_string(res->status));
    }
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::BadResponse, endpoint.url + " replied with invalid JSON: " + e.what());
    }
}

std::vector<QueryEmbedding> embed_remote(const std::vector<std::string>& texts,
                                         const std::optional<EndpointConfig>& endpoint) {
    if (!endpoint || endpoint->url.empty()) {
        throw Error(ErrorCode::EndpointUnconfigured, "no embedder endpoint configured");
    }
    if (texts.empty()) {
        throw Error(ErrorCode::BadParams, "no texts to embed");
    }
    const auto reply = post_json(*endpoint, {{"texts", texts}});

    auto bad = [](const std::string& why) { return Error(ErrorCode::BadResponse, "embedder reply: " + why); };
    if (!reply.is_object() || !reply.contains("embeddings") || !reply["embeddings"].is_array()) {
        throw bad("missing 'embeddings' array");
    }
    const auto& all = reply["embeddings"];
    if (all.size() != texts.size()) {
        throw bad(std::to_string(all.size()) + " embeddings for " + std::to_string(texts.size()) + " texts");
    }
    std::vector<QueryEmbedding> out;
    std::size_t dim = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto& tokens = all[i];
        if (!tokens.is_array() || tokens.empty()) {
            throw bad("embedding " + std::to_string(i) + " has no tokens");
        }
        Matrix m;
        for (const auto& tok : tokens) {
            if (!tok.is_array() || tok.empty()) {
                throw bad("embedding " + std::to_string(i) + " has an empty or non-array token");
            }
            if (dim == 0) {
                dim = tok.size();
            } else if (tok.size() != dim) {
                throw bad("mismatched inner lengths (" + std::to_string(tok.size()) + " vs " + std::to_string(dim) +
                          ")");
            }
            std::vector<float> row;
            row.reserve(dim);
            for (const auto& x : tok) {
                if (!x.is_number() || !std::isfinite(x.get<float>())) {
                    throw bad("non-numeric or non-finite value");
                }
                row.push_back(x.get<float>());
            }
            m.append_row(row);
        }
        out.push_back({"text-" + std::to_string(i), std::move(m)});
    }
    return out;
}

}  // namespace lateindex
