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

#include "lateindex/evaluation.h"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "lateindex/error.h"

namespace lateindex {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_double(const json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key) || obj[key].is_null()) {
        return std::nullopt;
    }
    return obj[key].get<double>();
}

double to_ms(std::chrono::nanoseconds d) { return std::chrono::duration<double, std::milli>(d).count(); }

}  // namespace

double recall_at_k(const RunFile& run, const Qrels& qrels, std::size_t k) {
    if (k == 0) {
        throw Error(ErrorCode::BadParams, "k must be >= 1");
    }
    if (run.queries.empty()) {
        throw Error(ErrorCode::EmptyRun, "run has no queries");
    }
    std::size_t hits = 0;
    for (const auto& q : run.queries) {
        auto it = qrels.find(q.query_id);
        if (it == qrels.end()) {
            throw Error(ErrorCode::MissingQrels, "no judgments for query " + q.query_id);
        }
        const std::size_t depth = std::min(k, q.entries.size());
        for (std::size_t i = 0; i < depth; ++i) {
            auto rel = it->second.find(q.entries[i].page);
            if (rel != it->second.end() && rel->second > 0) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(run.queries.size());
}

CandidateStats candidate_stats(std::span<const PipelineTrace> traces, std::size_t corpus_pages) {
    if (traces.empty()) {
        throw Error(ErrorCode::EmptyInput, "no traces");
    }
    if (corpus_pages == 0) {
        throw Error(ErrorCode::BadParams, "corpus has no pages");
    }
    std::vector<double> counts;
    counts.reserve(traces.size());
    double sum = 0.0;
    for (const auto& t : traces) {
        counts.push_back(static_cast<double>(t.candidates_examined));
        sum += counts.back();
    }
    CandidateStats s;
    s.mean = sum / static_cast<double>(counts.size());
    s.max = *std::max_element(counts.begin(), counts.end());
    s.median = median(std::move(counts));
    s.fraction_mean = s.mean / static_cast<double>(corpus_pages);
    return s;
}

json EvalReport::to_json() const {
    json j;
    j["recall"] = {{"1", opt(recall_at_1)}, {"5", opt(recall_at_5)}, {"10", opt(recall_at_10)}};
    if (candidates) {
        j["candidates"] = {{"mean", candidates->mean},
                           {"median", candidates->median},
                           {"max", candidates->max},
                           {"fraction_mean", candidates->fraction_mean}};
    } else {
        j["candidates"] = {{"mean", nullptr}, {"median", nullptr}, {"max", nullptr}, {"fraction_mean", nullptr}};
    }
    j["latency_ms"] = {
        {"two_pass_median", opt(two_pass_median_ms)}, {"oracle_median", opt(oracle_median_ms)}, {"speedup", opt(speedup)}};
    j["agreement_top1"] = opt(agreement_top1);
    return j;
}

EvalReport EvalReport::from_json(const json& j) {
    EvalReport r;
    const json empty = json::object();
    const auto& recall = j.contains("recall") ? j["recall"] : empty;
    r.recall_at_1 = opt_double(recall, "1");
    r.recall_at_5 = opt_double(recall, "5");
    r.recall_at_10 = opt_double(recall, "10");
    const auto& cand = j.contains("candidates") ? j["candidates"] : empty;
    if (auto mean = opt_double(cand, "mean")) {
        r.candidates = CandidateStats{*mean, opt_double(cand, "median").value_or(0.0), opt_double(cand, "max").value_or(0.0),
                                      opt_double(cand, "fraction_mean").value_or(0.0)};
    }
    const auto& lat = j.contains("latency_ms") ? j["latency_ms"] : empty;
    r.two_pass_median_ms = opt_double(lat, "two_pass_median");
    r.oracle_median_ms = opt_double(lat, "oracle_median");
    r.speedup = opt_double(lat, "speedup");
    r.agreement_top1 = opt_double(j, "agreement_top1");
    return r;
}

RunFile make_run(std::span<const QueryEmbedding> queries, std::span<const RankedResult> results, std::string tag) {
    if (queries.size() != results.size()) {
        throw Error(ErrorCode::BadParams, "queries and results differ in length");
    }
    RunFile run;
    run.tag = std::move(tag);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        run.queries.push_back({queries[i].query_id, results[i].entries});
    }
    return run;
}

BenchResult bench_compare(std::span<const QueryEmbedding> queries, const SearchIndex& index,
                          const RetrievalConfig& cfg, const BenchOptions& options, const Qrels* qrels) {
    if (options.repetitions < 3) {
        throw Error(ErrorCode::BadParams, "bench needs at least 3 repetitions");
    }
    if (queries.empty()) {
        throw Error(ErrorCode::EmptyInput, "no queries to benchmark");
    }
    cfg.validate();

    std::vector<RankedResult> two_pass(queries.size());
    std::vector<RankedResult> oracle(queries.size());
    std::vector<PipelineTrace> traces(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        auto outcome = search(queries[i], index, cfg);
        two_pass[i] = std::move(outcome.result);
        traces[i] = outcome.trace;
        oracle[i] = oracle_rank(queries[i], index.store, cfg.top_k);
    }

    std::vector<double> two_pass_ms;
    std::vector<double> oracle_ms;
    for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
        for (const auto& q : queries) {
            auto t0 = Clock::now();
            auto r1 = search(q, index, cfg);
            auto t1 = Clock::now();
            auto r2 = oracle_rank(q, index.store, cfg.top_k);
            auto t2 = Clock::now();
            (void)r1;
            (void)r2;
            two_pass_ms.push_back(to_ms(t1 - t0));
            oracle_ms.push_back(to_ms(t2 - t1));
        }
    }

    std::size_t agree = 0;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (!two_pass[i].entries.empty() && !oracle[i].entries.empty() &&
            two_pass[i].entries.front().page == oracle[i].entries.front().page) {
            ++agree;
        }
    }

    BenchResult out;
    auto& report = out.report;
    report.two_pass_median_ms = median(two_pass_ms);
    report.oracle_median_ms = median(oracle_ms);
    report.speedup = *report.oracle_median_ms / std::max(*report.two_pass_median_ms, 1e-9);
    report.agreement_top1 = static_cast<double>(agree) / static_cast<double>(queries.size());
    report.candidates = candidate_stats(traces, index.store.page_count());
    if (qrels) {
        const auto run = make_run(queries, two_pass, "bench");
        report.recall_at_1 = recall_at_k(run, *qrels, 1);
        report.recall_at_5 = recall_at_k(run, *qrels, 5);
        report.recall_at_10 = recall_at_k(run, *qrels, 10);
    }
    out.agreement_ok = *report.agreement_top1 >= options.min_agreement;
    return out;
}

void write_traces(std::span<const TraceRecord> traces, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (path.empty() || !out) {
        throw Error(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
    }
    for (const auto& t : traces) {
        json line = {{"query_id", t.query_id},
                     {"candidates_examined", t.trace.candidates_examined},
                     {"first_pass_hits", t.trace.first_pass_hits},
                     {"first_pass_ms", to_ms(t.trace.first_pass_duration)},
                     {"rerank_ms", to_ms(t.trace.rerank_duration)}};
        out << line.dump() << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::IoFailure, "write failed for " + path);
    }
}

std::vector<TraceRecord> read_traces(const std::string& path) {
    std::ifstream in(path);
    if (path.empty() || !in) {
        throw Error(ErrorCode::IoFailure, "cannot open '" + path + "'");
    }
    std::vector<TraceRecord> out;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto j = json::parse(line);
            TraceRecord r;
            r.query_id = j.at("query_id").get<std::string>();
            r.trace.candidates_examined = j.at("candidates_examined").get<std::size_t>();
            r.trace.first_pass_hits = j.at("first_pass_hits").get<std::size_t>();
            r.trace.first_pass_duration = std::chrono::nanoseconds(
                static_cast<std::int64_t>(j.at("first_pass_ms").get<double>() * 1e6));
            r.trace.rerank_duration =
                std::chrono::nanoseconds(static_cast<std::int64_t>(j.at("rerank_ms").get<double>() * 1e6));
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::MalformedLine, path + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace lateindex
