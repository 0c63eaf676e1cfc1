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

#include "lateindex/service.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "httplib.h"
#include "json.hpp"
#include "lateindex/error.h"

namespace lateindex::service {
namespace {

using json = nlohmann::json;

Response json_response(int status, const json& body) { return {status, body.dump()}; }

Response error_response(int status, const std::string& message) { return json_response(status, {{"error", message}}); }

/// Maps library failures onto HTTP statuses with a readable message.
Response from_error(const Error& e) {
    const std::string detail = e.what();
    switch (e.code()) {
        case ErrorCode::EmptyQuery: return error_response(422, "empty query: " + detail);
        case ErrorCode::CandidateOverflow: return error_response(422, "candidate overflow: " + detail);
        case ErrorCode::DimensionMismatch: return error_response(400, "dimension mismatch: " + detail);
        case ErrorCode::NonFinite: return error_response(400, "non-finite value: " + detail);
        case ErrorCode::BadParams: return error_response(400, "bad parameter: " + detail);
        case ErrorCode::EndpointUnconfigured: return error_response(503, "endpoint unconfigured: " + detail);
        case ErrorCode::TransportFailure:
        case ErrorCode::BadResponse: return error_response(502, "upstream failure: " + detail);
        case ErrorCode::UnknownPage: return error_response(404, "unknown page: " + detail);
        default: return error_response(500, detail);
    }
}

struct BadRequest {
    std::string message;
};

std::uint32_t positive_int(const json& body, const char* key) {
    const auto& v = body.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1 || v.get<std::int64_t>() > 0xFFFFFFFFll) {
        throw BadRequest{std::string("'") + key + "' must be a positive integer"};
    }
    return static_cast<std::uint32_t>(v.get<std::int64_t>());
}

/// Applies per-request overrides on top of the service defaults.
RetrievalConfig overrides(const json& body, RetrievalConfig cfg) {
    bool ef_given = false;
    if (body.contains("top_k") && !body["top_k"].is_null()) {
        cfg.top_k = positive_int(body, "top_k");
    }
    if (body.contains("ef_search") && !body["ef_search"].is_null()) {
        cfg.ef_search = positive_int(body, "ef_search");
        ef_given = true;
    }
    if (body.contains("k_token") && !body["k_token"].is_null()) {
        cfg.k_token = positive_int(body, "k_token");
        if (!ef_given) {
            cfg.ef_search = std::max(cfg.ef_search, cfg.k_token);
        }
    }
    if (body.contains("tau")) {
        const auto& tau = body["tau"];
        if (tau.is_null()) {
            cfg.tau.reset();
        } else if (tau.is_number()) {
            cfg.tau = tau.get<double>();
        } else {
            throw BadRequest{"'tau' must be a number or null"};
        }
    }
    try {
        if (body.contains("tau_mode") && !body["tau_mode"].is_null()) {
            if (!body["tau_mode"].is_string()) throw BadRequest{"'tau_mode' must be a string"};
            cfg.tau_mode = parse_tau_mode(body["tau_mode"].get<std::string>());
        }
        if (body.contains("first_pass") && !body["first_pass"].is_null()) {
            if (!body["first_pass"].is_string()) throw BadRequest{"'first_pass' must be a string"};
            cfg.first_pass = parse_first_pass(body["first_pass"].get<std::string>());
        }
    } catch (const Error& e) {
        throw BadRequest{e.what()};
    }
    return cfg;
}

Matrix parse_embedding(const json& rows, std::size_t dim) {
    if (!rows.is_array()) {
        throw BadRequest{"'query_embedding' must be an array of arrays"};
    }
    Matrix m;
    for (const auto& row : rows) {
        if (!row.is_array()) {
            throw BadRequest{"'query_embedding' rows must be arrays"};
        }
        if (row.size() != dim) {
            throw BadRequest{"dimension mismatch: token of length " + std::to_string(row.size()) + ", index uses " +
                             std::to_string(dim)};
        }
        std::vector<float> values;
        values.reserve(dim);
        for (const auto& x : row) {
            if (!x.is_number()) {
                throw BadRequest{"'query_embedding' values must be numbers"};
            }
            values.push_back(x.get<float>());
        }
        m.append_row(values);
    }
    return m;
}

json results_json(const RankedResult& result) {
    json results = json::array();
    for (const auto& e : result.entries) {
        results.push_back({{"doc_id", e.page.doc_id},
                           {"page", e.page.page_number},
                           {"score", static_cast<double>(e.score)},
                           {"rank", e.rank}});
    }
    return results;
}

bool contains_ci(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) {
        return false;
    }
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(), [](char a, char b) {
        return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
    });
    return it != haystack.end();
}

std::optional<json> parse_body(const std::string& body) {
    try {
        auto j = json::parse(body);
        if (j.is_object()) {
            return j;
        }
    } catch (const json::parse_error&) {
    }
    return std::nullopt;
}

}  // namespace

void ServiceConfig::validate() const {
    if (port < 0 || port > 65535) {
        throw Error(ErrorCode::BadParams, "port out of range");
    }
    if (request_timeout.count() <= 0) {
        throw Error(ErrorCode::BadParams, "request timeout must be positive");
    }
    retrieval.validate();
}

SearchService::SearchService(SearchIndex index, ServiceConfig config)
    : index_(std::move(index)), config_(std::move(config)) {
    config_.validate();
    if (index_.store.empty()) {
        throw Error(ErrorCode::EmptyStore, "refusing to serve an empty index");
    }
    for (auto* endpoint : {&config_.embedder, &config_.reader}) {
        if (*endpoint && (*endpoint)->url.empty()) {
            endpoint->reset();
        }
    }
}

Response SearchService::handle_search(const std::string& body_text) const {
    const auto body = parse_body(body_text);
    if (!body) {
        return error_response(400, "body must be a JSON object");
    }
    try {
        const RetrievalConfig cfg = overrides(*body, config_.retrieval);
        const bool has_embedding = body->contains("query_embedding") && !(*body)["query_embedding"].is_null();
        const bool has_text = body->contains("query_text") && !(*body)["query_text"].is_null();
        if (has_embedding == has_text) {
            return error_response(400, "provide exactly one of 'query_embedding' or 'query_text'");
        }

        QueryEmbedding query;
        if (has_embedding) {
            query = {"inline", parse_embedding((*body)["query_embedding"], index_.store.dim())};
        } else {
            if (!(*body)["query_text"].is_string()) {
                return error_response(400, "'query_text' must be a string");
            }
            if (!config_.embedder) {
                return error_response(503, "query_text needs an embedder endpoint, none configured");
            }
            query = embed_remote({(*body)["query_text"].get<std::string>()}, config_.embedder).front();
            query.query_id = "text";
        }

        const auto outcome = search(query, index_, cfg);
        return json_response(200, {{"results", results_json(outcome.result)},
                                   {"candidates_examined", outcome.trace.candidates_examined}});
    } catch (const BadRequest& e) {
        return error_response(400, e.message);
    } catch (const Error& e) {
        return from_error(e);
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

Response SearchService::handle_answer(const std::string& body_text) const {
    const auto body = parse_body(body_text);
    if (!body) {
        return error_response(400, "body must be a JSON object");
    }
    if (!config_.embedder || !config_.reader) {
        return error_response(503, "answering needs both embedder and reader endpoints");
    }
    try {
        if (!body->contains("question") || !(*body)["question"].is_string()) {
            return error_response(400, "'question' must be a string");
        }
        const std::string question = (*body)["question"].get<std::string>();
        RetrievalConfig cfg = config_.retrieval;
        if (body->contains("top_k") && !(*body)["top_k"].is_null()) {
            cfg.top_k = positive_int(*body, "top_k");
        }

        auto query = embed_remote({question}, config_.embedder).front();
        const auto outcome = search(query, index_, cfg);

        json pages = json::array();
        std::vector<std::string> forwarded;
        for (const auto& e : outcome.result.entries) {
            pages.push_back({{"doc_id", e.page.doc_id}, {"page", e.page.page_number}});
            forwarded.push_back(to_string(e.page));
        }
        const json reply = post_json(*config_.reader, {{"question", question}, {"pages", pages}});
        if (!reply.is_object() || !reply.contains("answer") || !reply["answer"].is_string()) {
            throw Error(ErrorCode::BadResponse, "reader reply lacks an 'answer' string");
        }
        const std::string answer = reply["answer"].get<std::string>();
        const bool no_answer = contains_ci(answer, config_.no_answer_sentinel);

        // Only pages that were actually forwarded may be cited.
        json sources = json::array();
        if (!no_answer) {
            if (reply.contains("sources") && reply["sources"].is_array()) {
                std::set<std::string> emitted;
                for (const auto& s : reply["sources"]) {
                    if (!s.is_string()) {
                        continue;
                    }
                    const auto id = s.get<std::string>();
                    if (std::find(forwarded.begin(), forwarded.end(), id) != forwarded.end() &&
                        emitted.insert(id).second) {
                        sources.push_back(id);
                    }
                }
            } else {
                for (const auto& id : forwarded) {
                    sources.push_back(id);
                }
            }
        }
        return json_response(200, {{"answer", answer}, {"sources", sources}, {"no_answer", no_answer}});
    } catch (const BadRequest& e) {
        return error_response(400, e.message);
    } catch (const Error& e) {
        return from_error(e);
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

Response SearchService::handle_page_info(const std::string& doc_id, const std::string& page) const {
    std::uint32_t number = 0;
    auto [end, err] = std::from_chars(page.data(), page.data() + page.size(), number);
    if (page.empty() || err != std::errc() || end != page.data() + page.size()) {
        return error_response(400, "malformed page number '" + page + "'");
    }
    const PageKey key{doc_id, number};
    const auto index = index_.store.find_page(key);
    if (!index) {
        return error_response(404, "unknown page " + to_string(key));
    }
    return json_response(200,
                         {{"doc_id", doc_id}, {"page", number}, {"patches", index_.store.page(*index).patch_count}});
}

Response SearchService::handle_health() const {
    return json_response(200, {{"status", "ok"}, {"pages", index_.store.page_count()}, {"dim", index_.store.dim()}});
}

HttpServer::HttpServer(const SearchService& service) : server_(std::make_unique<httplib::Server>()) {
    auto reply = [](httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    server_->Post("/v1/search", [&service, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.handle_search(req.body));
    });
    server_->Post("/v1/answer", [&service, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.handle_answer(req.body));
    });
    server_->Get(R"(/v1/pages/(.+)/([^/]*))", [&service, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.handle_page_info(req.matches[1], req.matches[2]));
    });
    server_->Get("/healthz", [&service, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, service.handle_health());
    });
    server_->set_error_handler([reply](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            reply(res, error_response(res.status, "no route"));
        }
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
        throw Error(ErrorCode::IoFailure, "cannot bind " + host + ":" + std::to_string(port));
    }
    return bound;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
    if (server_) {
        server_->stop();
    }
}

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace lateindex::service
