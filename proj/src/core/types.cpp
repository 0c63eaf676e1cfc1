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

#include "lateindex/types.h"

#include <string>

#include "lateindex/error.h"

namespace lateindex {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::DuplicatePatch: return "DuplicatePatch";
        case ErrorCode::MissingPatch: return "MissingPatch";
        case ErrorCode::EmptyStore: return "EmptyStore";
        case ErrorCode::BadParams: return "BadParams";
        case ErrorCode::UnknownPage: return "UnknownPage";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::CorruptIndex: return "CorruptIndex";
        case ErrorCode::CorruptFile: return "CorruptFile";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::EmptyQuery: return "EmptyQuery";
        case ErrorCode::EmptyPage: return "EmptyPage";
        case ErrorCode::EmptyCandidates: return "EmptyCandidates";
        case ErrorCode::CandidateOverflow: return "CandidateOverflow";
        case ErrorCode::DuplicatePage: return "DuplicatePage";
        case ErrorCode::BadSpec: return "BadSpec";
        case ErrorCode::EndpointUnconfigured: return "EndpointUnconfigured";
        case ErrorCode::TransportFailure: return "TransportFailure";
        case ErrorCode::BadResponse: return "BadResponse";
        case ErrorCode::MissingQrels: return "MissingQrels";
        case ErrorCode::EmptyRun: return "EmptyRun";
        case ErrorCode::MalformedLine: return "MalformedLine";
        case ErrorCode::EmptyInput: return "EmptyInput";
    }
    return "Unknown";
}

std::string to_string(const PageKey& key) {
    return key.doc_id + "#" + std::to_string(key.page_number);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw Error(ErrorCode::DimensionMismatch, "matrix payload has " + std::to_string(data_.size()) +
                                                      " values, expected " + std::to_string(rows_ * cols_));
    }
}

Matrix Matrix::from_rows(const std::vector<std::vector<float>>& rows) {
    Matrix m;
    for (const auto& r : rows) {
        m.append_row(r);
    }
    return m;
}

void Matrix::append_row(std::span<const float> values) {
    if (rows_ == 0 && cols_ == 0) {
        cols_ = values.size();
    } else if (values.size() != cols_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "row of length " + std::to_string(values.size()) + " in matrix of width " + std::to_string(cols_));
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

std::string_view to_string(TauMode mode) {
    return mode == TauMode::Absolute ? "absolute" : "relative_to_top";
}

std::string_view to_string(FirstPass pass) {
    switch (pass) {
        case FirstPass::Hnsw: return "hnsw";
        case FirstPass::Exact: return "exact";
        case FirstPass::Pooled: return "pooled";
    }
    return "hnsw";
}

TauMode parse_tau_mode(std::string_view text) {
    if (text == "absolute") return TauMode::Absolute;
    if (text == "relative_to_top") return TauMode::RelativeToTop;
    throw Error(ErrorCode::BadParams, "unknown tau_mode '" + std::string(text) + "'");
}

FirstPass parse_first_pass(std::string_view text) {
    if (text == "hnsw") return FirstPass::Hnsw;
    if (text == "exact") return FirstPass::Exact;
    if (text == "pooled") return FirstPass::Pooled;
    throw Error(ErrorCode::BadParams, "unknown first_pass '" + std::string(text) + "'");
}

void RetrievalConfig::validate() const {
    if (k_token < 1) {
        throw Error(ErrorCode::BadParams, "k_token must be >= 1");
    }
    if (top_k < 1) {
        throw Error(ErrorCode::BadParams, "top_k must be >= 1");
    }
    if (tau && !(*tau >= 0.0 && *tau <= 1.0)) {
        throw Error(ErrorCode::BadParams, "tau must lie in [0, 1]");
    }
    if (candidate_cap < 1) {
        throw Error(ErrorCode::BadParams, "candidate_cap must be >= 1");
    }
    // ef only bounds the graph beam, so the exact and pooled scans ignore it.
    if (first_pass == FirstPass::Hnsw && ef_search < k_token) {
        throw Error(ErrorCode::BadParams, "ef_search (" + std::to_string(ef_search) + ") must be >= k_token (" +
                                              std::to_string(k_token) + ")");
    }
}

}  // namespace lateindex
