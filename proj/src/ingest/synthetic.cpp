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

#include "lateindex/synthetic.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "lateindex/error.h"
#include "lateindex/mvec.h"
#include "lateindex/vector_math.h"

namespace lateindex {

void SyntheticSpec::validate() const {
    if (pages < 1 || patches_per_page < 1 || dim < 1 || queries < 1 || tokens_per_query < 1 || pages_per_doc < 1) {
        throw Error(ErrorCode::BadSpec, "all counts must be >= 1");
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw Error(ErrorCode::BadSpec, "noise_sigma must be finite and >= 0");
    }
    if (tokens_per_query > patches_per_page) {
        throw Error(ErrorCode::BadSpec, "tokens_per_query (" + std::to_string(tokens_per_query) +
                                            ") exceeds patches_per_page (" + std::to_string(patches_per_page) + ")");
    }
}

std::vector<PatchRecord> SyntheticCorpus::records() const {
    std::vector<PatchRecord> out;
    out.reserve(page_vectors.rows());
    for (std::size_t p = 0; p < page_keys.size(); ++p) {
        for (std::uint32_t j = 0; j < patches_per_page; ++j) {
            auto row = page_vectors.row(p * patches_per_page + j);
            out.push_back({{page_keys[p], j}, std::vector<float>(row.begin(), row.end())});
        }
    }
    return out;
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    SyntheticCorpus corpus;
    corpus.patches_per_page = spec.patches_per_page;
    corpus.page_keys.reserve(spec.pages);
    for (std::uint32_t p = 0; p < spec.pages; ++p) {
        char doc[32];
        std::snprintf(doc, sizeof(doc), "doc-%05u", p / spec.pages_per_doc);
        corpus.page_keys.push_back({doc, p % spec.pages_per_doc});
    }

    const std::size_t dim = spec.dim;
    corpus.page_vectors = Matrix(std::size_t{spec.pages} * spec.patches_per_page, dim);
    std::vector<float> raw(dim);
    for (std::size_t r = 0; r < corpus.page_vectors.rows(); ++r) {
        // Redraw in the (measure-zero) event of an all-zero sample.
        for (;;) {
            for (auto& x : raw) {
                x = static_cast<float>(normal(rng));
            }
            if (l2_norm(raw) >= 1e-6f) {
                break;
            }
        }
        auto unit = l2_normalize(raw);
        std::copy(unit.begin(), unit.end(), corpus.page_vectors.row(r).begin());
    }

    std::uniform_int_distribution<std::uint32_t> pick_page(0, spec.pages - 1);
    std::vector<std::uint32_t> patch_ids(spec.patches_per_page);
    for (std::uint32_t qi = 0; qi < spec.queries; ++qi) {
        const std::uint32_t target = pick_page(rng);
        // Partial Fisher-Yates: the first tokens_per_query slots are the sample.
        for (std::uint32_t j = 0; j < spec.patches_per_page; ++j) {
            patch_ids[j] = j;
        }
        for (std::uint32_t j = 0; j < spec.tokens_per_query; ++j) {
            std::uniform_int_distribution<std::uint32_t> pick(j, spec.patches_per_page - 1);
            std::swap(patch_ids[j], patch_ids[pick(rng)]);
        }

        char qid[32];
        std::snprintf(qid, sizeof(qid), "q%05u", qi);
        QueryEmbedding query{qid, Matrix(spec.tokens_per_query, dim)};
        for (std::uint32_t t = 0; t < spec.tokens_per_query; ++t) {
            auto patch = corpus.page_vectors.row(std::size_t{target} * spec.patches_per_page + patch_ids[t]);
            auto out = query.matrix.row(t);
            if (spec.noise_sigma == 0.0) {
                std::copy(patch.begin(), patch.end(), out.begin());
                continue;
            }
            for (std::size_t c = 0; c < dim; ++c) {
                raw[c] = static_cast<float>(patch[c] + spec.noise_sigma * normal(rng));
            }
            auto unit = l2_normalize(raw);
            std::copy(unit.begin(), unit.end(), out.begin());
        }
        corpus.targets.push_back(corpus.page_keys[target]);
        corpus.qrels[query.query_id][corpus.page_keys[target]] = 1;
        corpus.queries.push_back(std::move(query));
    }
    return corpus;
}

SyntheticFiles write_synthetic(const SyntheticCorpus& corpus, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoFailure, "cannot create " + out_dir + ": " + ec.message());
    }
    const fs::path dir(out_dir);
    SyntheticFiles files{(dir / "manifest.jsonl").string(), (dir / "corpus.mvec").string(),
                         (dir / "queries.jsonl").string(), (dir / "queries.mvec").string(),
                         (dir / "qrels.tsv").string()};

    write_mvec(corpus.page_vectors, files.corpus_vectors);
    CorpusManifest manifest;
    for (std::size_t p = 0; p < corpus.page_keys.size(); ++p) {
        manifest.entries.push_back({corpus.page_keys[p].doc_id, corpus.page_keys[p].page_number,
                                    corpus.patches_per_page, "corpus.mvec",
                                    std::uint64_t{p} * corpus.patches_per_page});
    }
    write_manifest(manifest, files.manifest);

    Matrix query_rows;
    std::vector<QueryEntry> entries;
    for (const auto& q : corpus.queries) {
        entries.push_back({q.query_id, "queries.mvec", query_rows.rows(), static_cast<std::uint32_t>(q.matrix.rows())});
        for (std::size_t t = 0; t < q.matrix.rows(); ++t) {
            query_rows.append_row(q.matrix.row(t));
        }
    }
    write_mvec(query_rows, files.query_vectors);
    write_query_entries(entries, files.queries);
    write_qrels(corpus.qrels, files.qrels);
    return files;
}

}  // namespace lateindex
