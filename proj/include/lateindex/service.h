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
#include <memory>
#include <optional>
#include <string>

#include "lateindex/embedder_client.h"
#include "lateindex/retrieval.h"

namespace httplib {
class Server;
}

namespace lateindex::service {

struct ServiceConfig {
    std::string index_path;
    std::string host = "127.0.0.1";
    int port = 8080;
    RetrievalConfig retrieval;
    std::optional<EndpointConfig> embedder;
    std::optional<EndpointConfig> reader;
    std::chrono::milliseconds request_timeout{30000};
    /// A reader answer containing this (case-insensitive) means "no answer".
    std::string no_answer_sentinel = "unable to find answer";

    /// Throws BadParams for a bad port or non-positive timeout.
    void validate() const;
};

/// Status code plus a UTF-8 JSON body. Errors carry {"error": "..."}.
struct Response {
    int status = 200;
    std::string body;
};

/// Request handlers over an immutable, shared index. Every handler is
/// const and safe to call from concurrent request threads.
class SearchService {
public:
    /// Throws EmptyStore for an index without pages, BadParams for a bad config.
    SearchService(SearchIndex index, ServiceConfig config);

    /// POST /v1/search
    Response handle_search(const std::string& body) const;
    /// POST /v1/answer
    Response handle_answer(const std::string& body) const;
    /// GET /v1/pages/{doc_id}/{page}
    Response handle_page_info(const std::string& doc_id, const std::string& page) const;
    /// GET /healthz
    Response handle_health() const;

    const SearchIndex& index() const { return index_; }
    const ServiceConfig& config() const { return config_; }

private:
    SearchIndex index_;
    ServiceConfig config_;
};

/// Binds SearchService routes onto an HTTP listener.
class HttpServer {
public:
    explicit HttpServer(const SearchService& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Returns the bound port (port 0 picks a free one). Throws IoFailure.
    int bind(const std::string& host, int port);
    /// Blocks until stop() is called.
    void listen();
    void stop();
    void wait_until_ready() const;

private:
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace lateindex::service
