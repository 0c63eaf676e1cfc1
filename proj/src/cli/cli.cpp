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

#include "lateindex/cli.h"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <ostream>

#include "CLI11.hpp"
#include "lateindex/corpus_io.h"
#include "lateindex/error.h"
#include "lateindex/evaluation.h"
#include "lateindex/index_io.h"
#include "lateindex/retrieval.h"
#include "lateindex/run_file.h"
#include "lateindex/service.h"
#include "lateindex/synthetic.h"

namespace lateindex::cli {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

/// A problem with how the command was invoked (exit code 1).
struct UsageError {
    std::string message;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// RetrievalConfig flags shared by query, bench and serve. A JSON config
/// file supplies a base; explicit flags win.
struct RetrievalFlags {
    std::string config_path;
    std::uint32_t k_token = 0;
    std::string tau;
    std::string tau_mode;
    std::string first_pass;
    std::uint32_t ef_search = 0;
    std::uint32_t top_k = 0;
    std::size_t candidate_cap = 0;

    CLI::Option* k_token_opt = nullptr;
    CLI::Option* tau_opt = nullptr;
    CLI::Option* tau_mode_opt = nullptr;
    CLI::Option* first_pass_opt = nullptr;
    CLI::Option* ef_opt = nullptr;
    CLI::Option* top_k_opt = nullptr;
    CLI::Option* cap_opt = nullptr;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "JSON file with RetrievalConfig keys")->check(CLI::ExistingFile);
        k_token_opt = app->add_option("--k-token", k_token, "first-pass hits per query token (default 10)")
                          ->check(CLI::PositiveNumber);
        tau_opt = app->add_option("--tau", tau, "threshold in [0,1] or 'none' (default 0.9)");
        tau_mode_opt = app->add_option("--tau-mode", tau_mode, "absolute | relative_to_top (default absolute)")
                           ->check(CLI::IsMember({"absolute", "relative_to_top"}));
        first_pass_opt = app->add_option("--first-pass", first_pass, "hnsw | exact | pooled (default hnsw)")
                             ->check(CLI::IsMember({"hnsw", "exact", "pooled"}));
        ef_opt = app->add_option("--ef-search", ef_search, "graph beam width (default 64, raised to k_token)")
                     ->check(CLI::PositiveNumber);
        top_k_opt = app->add_option("--top-k", top_k, "results per query (default 10)")->check(CLI::PositiveNumber);
        cap_opt = app->add_option("--candidate-cap", candidate_cap, "max candidate pages (default 1024)")
                      ->check(CLI::PositiveNumber);
    }

    RetrievalConfig resolve() const {
        RetrievalConfig cfg;
        bool ef_explicit = false;
        try {
            if (!config_path.empty()) {
                std::ifstream in(config_path);
                const json j = json::parse(in);
                cfg = retrieval_config_from_json(j, cfg);
                ef_explicit = j.contains("ef_search");
            }
            if (*top_k_opt) cfg.top_k = top_k;
            if (*cap_opt) cfg.candidate_cap = candidate_cap;
            if (*tau_mode_opt) cfg.tau_mode = parse_tau_mode(tau_mode);
            if (*first_pass_opt) cfg.first_pass = parse_first_pass(first_pass);
            if (*ef_opt) {
                cfg.ef_search = ef_search;
                ef_explicit = true;
            }
            if (*k_token_opt) cfg.k_token = k_token;
            if (*tau_opt) {
                if (tau == "none") {
                    cfg.tau.reset();
                } else {
                    std::size_t used = 0;
                    cfg.tau = std::stod(tau, &used);
                    if (used != tau.size()) {
                        throw UsageError{"--tau expects a number or 'none'"};
                    }
                }
            }
            if (!ef_explicit) {
                cfg.ef_search = std::max(cfg.ef_search, cfg.k_token);
            }
            cfg.validate();
        } catch (const json::exception& e) {
            throw UsageError{std::string("bad config file: ") + e.what()};
        } catch (const std::invalid_argument&) {
            throw UsageError{"--tau expects a number or 'none'"};
        } catch (const std::out_of_range&) {
            throw UsageError{"--tau out of range"};
        } catch (const Error& e) {
            throw UsageError{e.what()};
        }
        return cfg;
    }
};

SearchIndex load_search_index(const std::string& path, std::ostream& err) {
    const auto start = Clock::now();
    auto loaded = load_index(path);
    auto index = make_search_index(std::move(loaded.store), std::move(loaded.graph));
    err << "loaded " << path << ": " << index.store.page_count() << " pages, " << index.store.row_count()
        << " patches, d=" << index.store.dim() << " (" << seconds_since(start) << " s)\n";
    return index;
}

std::optional<EndpointConfig> endpoint_from(const std::string& flag_value, const char* env_name,
                                            std::chrono::milliseconds timeout) {
    std::string url = flag_value;
    if (url.empty()) {
        if (const char* env = std::getenv(env_name)) {
            url = env;
        }
    }
    if (url.empty()) {
        return std::nullopt;
    }
    return EndpointConfig{url, timeout};
}

}  // namespace

RetrievalConfig retrieval_config_from_json(const json& j, RetrievalConfig cfg) {
    if (!j.is_object()) {
        throw Error(ErrorCode::BadParams, "config must be a JSON object");
    }
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "k_token") {
                cfg.k_token = value.get<std::uint32_t>();
            } else if (key == "tau") {
                cfg.tau = value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
            } else if (key == "tau_mode") {
                cfg.tau_mode = parse_tau_mode(value.get<std::string>());
            } else if (key == "first_pass") {
                cfg.first_pass = parse_first_pass(value.get<std::string>());
            } else if (key == "ef_search") {
                cfg.ef_search = value.get<std::uint32_t>();
            } else if (key == "top_k") {
                cfg.top_k = value.get<std::uint32_t>();
            } else if (key == "normalize_on_ingest") {
                cfg.normalize_on_ingest = value.get<bool>();
            } else if (key == "candidate_cap") {
                cfg.candidate_cap = value.get<std::size_t>();
            } else {
                throw Error(ErrorCode::BadParams, "unknown config key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadParams, std::string("bad config value: ") + e.what());
    }
    return cfg;
}

json retrieval_config_to_json(const RetrievalConfig& cfg) {
    return {{"k_token", cfg.k_token},
            {"tau", cfg.tau ? json(*cfg.tau) : json(nullptr)},
            {"tau_mode", std::string(to_string(cfg.tau_mode))},
            {"first_pass", std::string(to_string(cfg.first_pass))},
            {"ef_search", cfg.ef_search},
            {"top_k", cfg.top_k},
            {"normalize_on_ingest", cfg.normalize_on_ingest},
            {"candidate_cap", cfg.candidate_cap}};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"lateindex: two-pass multi-vector retrieval (approximate first pass, late-interaction rerank)",
                 "lateindex"};
    app.require_subcommand(1);

    // gen-synthetic
    SyntheticSpec spec;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen-synthetic", "write a planted corpus, queries and qrels");
    gen->add_option("--pages", spec.pages, "pages in the corpus")->capture_default_str();
    gen->add_option("--patches", spec.patches_per_page, "patches per page")->capture_default_str();
    gen->add_option("--dim", spec.dim, "vector dimension")->capture_default_str();
    gen->add_option("--queries", spec.queries, "number of queries")->capture_default_str();
    gen->add_option("--tokens", spec.tokens_per_query, "tokens per query")->capture_default_str();
    gen->add_option("--sigma", spec.noise_sigma, "query noise standard deviation")->capture_default_str();
    gen->add_option("--seed", spec.seed, "random seed")->capture_default_str();
    gen->add_option("--pages-per-doc", spec.pages_per_doc, "pages grouped per doc_id")->capture_default_str();
    gen->add_option("--out", gen_out, "output directory")->required();

    // ingest
    std::string manifest_path, index_out;
    HnswParams hnsw;
    bool normalize = true;
    auto* ingest = app.add_subcommand("ingest", "build and save an index from a manifest");
    ingest->add_option("--manifest", manifest_path, "corpus manifest (JSON lines)")
        ->required()
        ->check(CLI::ExistingFile);
    ingest->add_option("--out", index_out, "index file to write")->required();
    ingest->add_option("--M", hnsw.M, "graph degree")->capture_default_str();
    ingest->add_option("--ef-construction", hnsw.ef_construction, "build beam width")->capture_default_str();
    ingest->add_option("--seed", hnsw.seed, "level-assignment seed")->capture_default_str();
    ingest->add_option("--normalize-on-ingest", normalize, "L2-normalize patch vectors")->capture_default_str();

    // query
    std::string index_path, queries_path, run_out, trace_out, tag = "lateindex";
    bool oracle_mode = false;
    RetrievalFlags query_flags;
    auto* query = app.add_subcommand("query", "run queries against an index and write a run file");
    query->add_option("--index", index_path, "index file")->required()->check(CLI::ExistingFile);
    query->add_option("--queries", queries_path, "queries file (JSON lines)")->required()->check(CLI::ExistingFile);
    query->add_option("--out", run_out, "run file to write")->required();
    query->add_option("--trace", trace_out, "optional per-query trace file (JSON lines)");
    query->add_option("--tag", tag, "run tag")->capture_default_str();
    query_flags.attach(query);
    auto* oracle_flag = query->add_flag("--oracle", oracle_mode, "exhaustive late interaction over every page");
    for (auto* opt : {query_flags.k_token_opt, query_flags.tau_opt, query_flags.tau_mode_opt,
                      query_flags.first_pass_opt, query_flags.ef_opt, query_flags.cap_opt}) {
        oracle_flag->excludes(opt);
    }

    // eval
    std::string eval_run, eval_qrels, eval_trace;
    std::size_t corpus_pages = 0;
    auto* eval = app.add_subcommand("eval", "score a run file against qrels and print the report");
    eval->add_option("--run", eval_run, "run file")->required()->check(CLI::ExistingFile);
    eval->add_option("--qrels", eval_qrels, "qrels file")->required()->check(CLI::ExistingFile);
    auto* corpus_opt = eval->add_option("--corpus-pages", corpus_pages, "pages in the corpus")->check(CLI::PositiveNumber);
    eval->add_option("--trace", eval_trace, "trace file from query")->check(CLI::ExistingFile)->needs(corpus_opt);

    // bench
    std::string bench_index, bench_queries, bench_qrels, bench_out;
    BenchOptions bench_opts;
    RetrievalFlags bench_flags;
    auto* bench = app.add_subcommand("bench", "time two-pass search against the exhaustive oracle");
    bench->add_option("--index", bench_index, "index file")->required()->check(CLI::ExistingFile);
    bench->add_option("--queries", bench_queries, "queries file")->required()->check(CLI::ExistingFile);
    bench->add_option("--qrels", bench_qrels, "optional qrels for recall")->check(CLI::ExistingFile);
    bench->add_option("--repetitions", bench_opts.repetitions, "timed passes (>= 3)")
        ->capture_default_str()
        ->check(CLI::Range(3, 1000000));
    bench->add_option("--min-agreement", bench_opts.min_agreement, "required top-1 agreement with the oracle")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    bench->add_option("--out", bench_out, "also write the report JSON here");
    bench_flags.attach(bench);

    // serve
    service::ServiceConfig svc;
    std::string embedder_url, reader_url;
    long timeout_ms = 30000;
    RetrievalFlags serve_flags;
    auto* serve = app.add_subcommand("serve", "serve the HTTP search API");
    serve->add_option("--index", svc.index_path, "index file")->required()->check(CLI::ExistingFile);
    serve->add_option("--host", svc.host, "listen address")->capture_default_str();
    serve->add_option("--port", svc.port, "listen port")->capture_default_str()->check(CLI::Range(0, 65535));
    serve->add_option("--embedder-url", embedder_url, "embedder endpoint (env LATEINDEX_EMBEDDER_URL)");
    serve->add_option("--reader-url", reader_url, "reader endpoint (env LATEINDEX_READER_URL)");
    serve->add_option("--timeout-ms", timeout_ms, "outbound request timeout")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    serve->add_option("--no-answer-sentinel", svc.no_answer_sentinel, "reader phrase meaning no answer")
        ->capture_default_str();
    serve_flags.attach(serve);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    RetrievalConfig cfg;
    try {
        if (*query) cfg = query_flags.resolve();
        if (*bench) cfg = bench_flags.resolve();
        if (*serve) cfg = serve_flags.resolve();
    } catch (const UsageError& e) {
        err << "error: " << e.message << "\n";
        return kExitUsage;
    }

    try {
        if (*gen) {
            const auto start = Clock::now();
            const auto files = gen_synthetic(spec, gen_out);
            err << "wrote " << spec.pages << " pages and " << spec.queries << " queries to " << gen_out << " ("
                << seconds_since(start) << " s)\n";
            out << json{{"manifest", files.manifest}, {"queries", files.queries}, {"qrels", files.qrels}}.dump() << "\n";
        } else if (*ingest) {
            auto start = Clock::now();
            const auto records = ingest_corpus(read_manifest(manifest_path), false);
            const auto store = build_store(records, normalize);
            err << "ingested " << store.row_count() << " patches over " << store.page_count() << " pages ("
                << seconds_since(start) << " s)\n";
            start = Clock::now();
            const auto graph = HnswGraph::build(store, hnsw);
            err << "built graph, max level " << int{graph.max_level()} << " (" << seconds_since(start) << " s)\n";
            save_index(store, graph, index_out);
            err << "saved " << index_out << "\n";
        } else if (*query) {
            const auto index = load_search_index(index_path, err);
            const auto queries = read_queries(queries_path);
            std::vector<RankedResult> results;
            std::vector<TraceRecord> traces;
            results.reserve(queries.size());
            for (const auto& q : queries) {
                if (oracle_mode) {
                    results.push_back(oracle_rank(q, index.store, cfg.top_k));
                } else {
                    auto outcome = search(q, index, cfg);
                    results.push_back(std::move(outcome.result));
                    traces.push_back({q.query_id, outcome.trace});
                }
            }
            write_run(make_run(queries, results, tag), run_out);
            if (!trace_out.empty()) {
                write_traces(traces, trace_out);
            }
            err << "wrote " << results.size() << " queries to " << run_out << "\n";
        } else if (*eval) {
            const auto run = read_run(eval_run);
            const auto qrels = read_qrels(eval_qrels);
            EvalReport report;
            report.recall_at_1 = recall_at_k(run, qrels, 1);
            report.recall_at_5 = recall_at_k(run, qrels, 5);
            report.recall_at_10 = recall_at_k(run, qrels, 10);
            if (!eval_trace.empty()) {
                std::vector<PipelineTrace> traces;
                for (const auto& t : read_traces(eval_trace)) {
                    traces.push_back(t.trace);
                }
                report.candidates = candidate_stats(traces, corpus_pages);
            }
            out << report.to_json().dump(2) << "\n";
        } else if (*bench) {
            const auto index = load_search_index(bench_index, err);
            const auto queries = read_queries(bench_queries);
            std::optional<Qrels> qrels;
            if (!bench_qrels.empty()) {
                qrels = read_qrels(bench_qrels);
            }
            const auto result = bench_compare(queries, index, cfg, bench_opts, qrels ? &*qrels : nullptr);
            const auto text = result.report.to_json().dump(2);
            out << text << "\n";
            if (!bench_out.empty()) {
                std::ofstream(bench_out) << text << "\n";
            }
            if (!result.agreement_ok) {
                err << "error: top-1 agreement " << *result.report.agreement_top1 << " below "
                    << bench_opts.min_agreement << "\n";
                return kExitRuntime;
            }
        } else if (*serve) {
            const std::chrono::milliseconds timeout(timeout_ms);
            svc.retrieval = cfg;
            svc.request_timeout = timeout;
            svc.embedder = endpoint_from(embedder_url, "LATEINDEX_EMBEDDER_URL", timeout);
            svc.reader = endpoint_from(reader_url, "LATEINDEX_READER_URL", timeout);
            service::SearchService service(load_search_index(svc.index_path, err), svc);
            service::HttpServer server(service);
            const int port = server.bind(svc.host, svc.port);
            err << "listening on " << svc.host << ":" << port << "\n";
            server.listen();
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace lateindex::cli
