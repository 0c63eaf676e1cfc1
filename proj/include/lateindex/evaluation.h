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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lateindex/corpus_io.h"
#include "lateindex/retrieval.h"
#include "lateindex/run_file.h"

namespace lateindex {

/// Fraction of run queries with a relevant page (relevance > 0) among their
/// first k entries. Throws EmptyRun, MissingQrels and BadParams (k == 0).
double recall_at_k(const RunFile& run, const Qrels& qrels, std::size_t k);

struct CandidateStats {
    double mean = 0.0;
    double median = 0.0;
    double max = 0.0;
    double fraction_mean = 0.0;  ///< mean / corpus pages
};

/// Throws EmptyInput.
CandidateStats candidate_stats(std::span<const PipelineTrace> traces, std::size_t corpus_pages);

/// Every field is optional: `eval` fills recall (and candidates when given
/// traces), `bench` fills everything it measured.
struct EvalReport {
    std::optional<double> recall_at_1;
    std::optional<double> recall_at_5;
    std::optional<double> recall_at_10;
    std::optional<CandidateStats> candidates;
    std::optional<double> two_pass_median_ms;
    std::optional<double> oracle_median_ms;
    std::optional<double> speedup;
    std::optional<double> agreement_top1;

    /// {"recall": {"1","5","10"}, "candidates": {"mean","median","max",
    /// "fraction_mean"}, "latency_ms": {"two_pass_median","oracle_median",
    /// "speedup"}, "agreement_top1"}; absent values are null.
    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
};

struct BenchOptions {
    std::size_t repetitions = 5;
    /// Top-1 agreement with the oracle below this marks the run as failed.
    double min_agreement = 0.95;
};

struct BenchResult {
    EvalReport report;
    bool agreement_ok = false;
};

/// Times search() and oracle_rank() over the same queries, sequentially,
/// `repetitions` times after one warm-up pass; latencies are medians over
/// every (query, repetition) sample. Recall is filled when qrels are given.
/// Throws BadParams (repetitions < 3) and EmptyInput.
BenchResult bench_compare(std::span<const QueryEmbedding> queries, const SearchIndex& index,
                          const RetrievalConfig& cfg, const BenchOptions& options, const Qrels* qrels = nullptr);

RunFile make_run(std::span<const QueryEmbedding> queries, std::span<const RankedResult> results, std::string tag);

/// Per-query trace line: {"query_id","candidates_examined","first_pass_hits",
/// "first_pass_ms","rerank_ms"}.
struct TraceRecord {
    std::string query_id;
    PipelineTrace trace;
};

void write_traces(std::span<const TraceRecord> traces, const std::string& path);
std::vector<TraceRecord> read_traces(const std::string& path);

}  // namespace lateindex
