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

#include <stdexcept>
#include <string>
#include <string_view>

namespace lateindex {

enum class ErrorCode {
    // vector math
    ZeroVector,
    NonFinite,
    DimensionMismatch,
    Overflow,
    // store and graph
    DuplicatePatch,
    MissingPatch,
    EmptyStore,
    BadParams,
    UnknownPage,
    // persistence and file formats
    IoFailure,
    CorruptIndex,
    CorruptFile,
    VersionMismatch,
    // retrieval
    EmptyQuery,
    EmptyPage,
    EmptyCandidates,
    CandidateOverflow,
    // ingestion
    DuplicatePage,
    BadSpec,
    EndpointUnconfigured,
    TransportFailure,
    BadResponse,
    // evaluation
    MissingQrels,
    EmptyRun,
    MalformedLine,
    EmptyInput,
};

std::string_view error_code_name(ErrorCode code);

/// All library failures are reported with this exception; `code()` is the
/// stable, testable part and `what()` carries a human-readable detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace lateindex
