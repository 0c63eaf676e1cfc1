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

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "lateindex/corpus_io.h"
#include "lateindex/detail/byte_io.h"
#include "lateindex/embedder_client.h"
#include "lateindex/error.h"
#include "lateindex/mvec.h"
#include "lateindex/patch_store.h"
#include "lateindex/retrieval.h"
#include "lateindex/synthetic.h"
#include "support/fake_endpoint.h"
#include "support/test_util.h"

using namespace lateindex;
using lateindex::testkit::TempDir;
using nlohmann::json;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::EmptyInput;
}

void write_text(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::string read_text(const std::string& path) {
    const auto bytes = detail::read_file(path);
    return {bytes.begin(), bytes.end()};
}

}  // namespace

TEST(MvecTest, SmallRoundTrip) {
    const auto m = Matrix::from_rows({{1.5f, -2.0f, 0.0f}, {3.25f, 1e-30f, -0.0f}});
    TempDir dir;
    write_mvec(m, dir.file("m.mvec"));
    const auto back = read_mvec(dir.file("m.mvec"));
    EXPECT_EQ(back.rows(), 2u);
    EXPECT_EQ(back.cols(), 3u);
    EXPECT_EQ(std::memcmp(back.values().data(), m.values().data(), 6 * sizeof(float)), 0);
}

TEST(MvecTest, BadMagic) {
    auto bytes = encode_mvec(Matrix::from_rows({{1.0f}}));
    std::memcpy(bytes.data(), "XXXX", 4);
    EXPECT_EQ(code_of([&] { decode_mvec(bytes); }), ErrorCode::CorruptFile);
}

TEST(MvecTest, HeaderAndSizeArithmetic) {
    const Matrix page(1030, 128);
    const auto bytes = encode_mvec(page);
    EXPECT_EQ(bytes.size(), 527380u);  // 20-byte header + 1030 * 128 * 4
    EXPECT_EQ(kMvecHeaderBytes + 1030u * 128u * 4u, bytes.size());
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MVEC");
    EXPECT_EQ(bytes[4], 1);
    EXPECT_EQ(bytes[5], 0);
    EXPECT_EQ(bytes[8] | (bytes[9] << 8), 128);
    EXPECT_EQ(bytes[12] | (bytes[13] << 8), 1030);
}

TEST(MvecTest, StructuralErrors) {
    const auto good = encode_mvec(Matrix::from_rows({{1.0f, 2.0f}, {3.0f, 4.0f}}));
    auto version = good;
    version[4] = 9;
    EXPECT_EQ(code_of([&] { decode_mvec(version); }), ErrorCode::VersionMismatch);
    auto scalar = good;
    scalar[5] = 1;
    EXPECT_EQ(code_of([&] { decode_mvec(scalar); }), ErrorCode::CorruptFile);
    EXPECT_EQ(code_of([&] { decode_mvec(std::span(good).first(good.size() - 1)); }), ErrorCode::CorruptFile);
    EXPECT_EQ(code_of([&] { decode_mvec(std::span(good).first(10)); }), ErrorCode::CorruptFile);
    EXPECT_EQ(code_of([] { read_mvec("/nonexistent/x.mvec"); }), ErrorCode::IoFailure);
    EXPECT_EQ(code_of([] { encode_mvec(Matrix::from_rows({{NAN}})); }), ErrorCode::NonFinite);
}

TEST(ManifestTest, TwoPagesThreePatches) {
    TempDir dir;
    std::mt19937_64 rng(1);
    Matrix vectors(0, 4);
    for (int i = 0; i < 6; ++i) vectors.append_row(lateindex::testkit::random_unit(rng, 4));
    write_mvec(vectors, dir.file("v.mvec"));
    write_text(dir.file("manifest.jsonl"),
               R"({"doc_id":"alpha","page":1,"patches":3,"file":"v.mvec","offset_vectors":0})"
               "\n"
               R"({"doc_id":"alpha","page":2,"patches":3,"file":"v.mvec","offset_vectors":3})"
               "\n");
    const auto manifest = read_manifest(dir.file("manifest.jsonl"));
    ASSERT_EQ(manifest.entries.size(), 2u);
    const auto records = ingest_corpus(manifest, false);
    ASSERT_EQ(records.size(), 6u);
    EXPECT_EQ(records[4].key, (PatchKey{{"alpha", 2}, 1}));
    EXPECT_TRUE(std::equal(records[4].vector.begin(), records[4].vector.end(), vectors.row(4).begin()));

    // ingest -> store -> fetch reproduces the file rows
    const auto store = build_store(records, false);
    for (std::uint32_t page = 1; page <= 2; ++page) {
        const auto fetched = fetch_page_patches(store, {"alpha", page});
        for (std::size_t j = 0; j < 3; ++j) {
            const auto row = vectors.row((page - 1) * 3 + j);
            EXPECT_TRUE(std::equal(row.begin(), row.end(), fetched[j].vector.begin()));
        }
    }
}

TEST(ManifestTest, WriteReadRoundTrip) {
    TempDir dir;
    CorpusManifest m;
    m.entries = {{"a b", 0, 2, "x.mvec", 0}, {"c", 7, 1, "sub/y.mvec", 99}};
    write_manifest(m, dir.file("m.jsonl"));
    const auto back = read_manifest(dir.file("m.jsonl"));
    EXPECT_EQ(back.entries, m.entries);
    EXPECT_EQ(std::filesystem::path(back.base_dir), dir.path());
}

TEST(ManifestTest, Errors) {
    TempDir dir;
    write_mvec(Matrix::from_rows({{1, 0}, {0, 1}}), dir.file("v.mvec"));
    const std::string line = R"({"doc_id":"a","page":0,"patches":1,"file":"v.mvec","offset_vectors":0})";

    write_text(dir.file("dup.jsonl"), line + "\n" + line + "\n");
    EXPECT_EQ(code_of([&] { ingest_corpus(read_manifest(dir.file("dup.jsonl")), true); }), ErrorCode::DuplicatePage);

    write_text(dir.file("range.jsonl"),
               R"({"doc_id":"a","page":0,"patches":3,"file":"v.mvec","offset_vectors":0})"
               "\n");
    EXPECT_EQ(code_of([&] { ingest_corpus(read_manifest(dir.file("range.jsonl")), true); }), ErrorCode::CorruptFile);

    for (const std::string bad : {
             R"({"doc_id":"a","page":0,"patches":1,"file":"v.mvec"})",
             R"({"doc_id":"a","page":-1,"patches":1,"file":"v.mvec","offset_vectors":0})",
             R"({"doc_id":"a","page":0,"patches":1,"file":"v.mvec","offset_vectors":0,"extra":1})",
             R"(not json)",
         }) {
        write_text(dir.file("bad.jsonl"), line + "\n" + bad + "\n");
        try {
            read_manifest(dir.file("bad.jsonl"));
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::MalformedLine);
            EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
        }
    }
    EXPECT_EQ(code_of([] { read_manifest("/nonexistent/m.jsonl"); }), ErrorCode::IoFailure);
}

TEST(QrelsTest, RoundTrip) {
    TempDir dir;
    Qrels q;
    q["q1"][{"doc", 3}] = 1;
    q["q2"][{"doc", 0}] = 2;
    write_qrels(q, dir.file("qrels.tsv"));
    EXPECT_EQ(read_text(dir.file("qrels.tsv")), "q1\tdoc\t3\t1\nq2\tdoc\t0\t2\n");
    EXPECT_EQ(read_qrels(dir.file("qrels.tsv")), q);
    write_text(dir.file("bad.tsv"), "q1 doc 3 1\n");
    EXPECT_EQ(code_of([&] { read_qrels(dir.file("bad.tsv")); }), ErrorCode::MalformedLine);
}

TEST(SyntheticTest, ZeroNoiseCopiesPatches) {
    SyntheticSpec spec;
    spec.pages = 100;
    spec.noise_sigma = 0.0;
    spec.queries = 100;
    const auto corpus = generate_synthetic(spec);
    const auto store = build_store(corpus.records(), false);
    for (std::size_t i = 0; i < corpus.queries.size(); ++i) {
        const auto& q = corpus.queries[i];
        const auto target = *store.find_page(corpus.targets[i]);
        const auto view = store.page_view(target);
        for (std::size_t t = 0; t < q.matrix.rows(); ++t) {
            bool found = false;
            for (std::size_t j = 0; j < view.rows && !found; ++j) {
                found = std::equal(view.row(j).begin(), view.row(j).end(), q.matrix.row(t).begin());
            }
            EXPECT_TRUE(found) << q.query_id << " token " << t;
        }
        EXPECT_EQ(oracle_rank(q, store, 1).entries[0].page, corpus.targets[i]);
    }
}

TEST(SyntheticTest, SeededOutputIsByteIdentical) {
    TempDir a, b;
    SyntheticSpec spec;
    spec.pages = 60;
    const auto fa = gen_synthetic(spec, a.path().string());
    const auto fb = gen_synthetic(spec, b.path().string());
    for (const auto& [x, y] : {std::pair{fa.manifest, fb.manifest}, std::pair{fa.corpus_vectors, fb.corpus_vectors},
                               std::pair{fa.queries, fb.queries}, std::pair{fa.query_vectors, fb.query_vectors},
                               std::pair{fa.qrels, fb.qrels}}) {
        EXPECT_EQ(detail::read_file(x), detail::read_file(y)) << x;
    }
    spec.seed = 43;
    EXPECT_NE(generate_synthetic(spec).page_vectors, generate_synthetic(SyntheticSpec{}).page_vectors);
}

TEST(SyntheticTest, FilesReloadToTheSameCorpus) {
    TempDir dir;
    SyntheticSpec spec;
    spec.pages = 45;
    spec.pages_per_doc = 20;
    const auto corpus = generate_synthetic(spec);
    const auto files = write_synthetic(corpus, dir.path().string());
    const auto records = ingest_corpus(read_manifest(files.manifest), false);
    const auto store = build_store(records, false);
    EXPECT_EQ(store.page_count(), 45u);
    EXPECT_EQ(store.page(44).key, (PageKey{"doc-00002", 4}));
    const auto queries = read_queries(files.queries);
    ASSERT_EQ(queries.size(), corpus.queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        EXPECT_EQ(queries[i].query_id, corpus.queries[i].query_id);
        EXPECT_EQ(queries[i].matrix, corpus.queries[i].matrix);
    }
    EXPECT_EQ(read_qrels(files.qrels), corpus.qrels);
}

TEST(SyntheticTest, OracleRecallOnDefaultSpec) {
    const auto corpus = generate_synthetic(SyntheticSpec{});
    const auto store = build_store(corpus.records(), true);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < corpus.queries.size(); ++i) {
        hits += oracle_rank(corpus.queries[i], store, 1).entries[0].page == corpus.targets[i] ? 1 : 0;
    }
    EXPECT_GE(hits, 99u);
}

TEST(SyntheticTest, SpecValidation) {
    SyntheticSpec spec;
    spec.tokens_per_query = spec.patches_per_page + 1;
    EXPECT_EQ(code_of([&] { generate_synthetic(spec); }), ErrorCode::BadSpec);
    spec = {};
    spec.noise_sigma = -1.0;
    EXPECT_EQ(code_of([&] { generate_synthetic(spec); }), ErrorCode::BadSpec);
    spec = {};
    spec.pages = 0;
    EXPECT_EQ(code_of([&] { generate_synthetic(spec); }), ErrorCode::BadSpec);
}

TEST(EmbedderTest, ParsesEmbeddings) {
    lateindex::testkit::FakeEndpoint fake("/embed", [](const json& req, int&) {
        EXPECT_EQ(req["texts"], json::array({"hello"}));
        return json{{"embeddings", {{{1, 0}, {0, 1}}}}};
    });
    const auto out = embed_remote({"hello"}, EndpointConfig{fake.url()});
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].matrix, Matrix::from_rows({{1, 0}, {0, 1}}));
}

TEST(EmbedderTest, EchoesFixturesForSeveralTexts) {
    const json fixture = {{{0.5, 0.5, 0.0}}, {{1, 2, 3}, {4, 5, 6}}};
    lateindex::testkit::FakeEndpoint fake("/embed", [&](const json&, int&) { return json{{"embeddings", fixture}}; });
    const auto out = embed_remote({"a", "b"}, EndpointConfig{fake.url()});
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[1].matrix, Matrix::from_rows({{1, 2, 3}, {4, 5, 6}}));
}

TEST(EmbedderTest, Failures) {
    const json ragged = {{"embeddings", {{{1, 0}, {0, 1, 2}}}}};
    lateindex::testkit::FakeEndpoint bad("/embed", [&](const json&, int&) { return ragged; });
    EXPECT_EQ(code_of([&] { embed_remote({"x"}, EndpointConfig{bad.url()}); }), ErrorCode::BadResponse);

    lateindex::testkit::FakeEndpoint count("/embed", [](const json&, int&) {
        return json{{"embeddings", {{{1.0}}, {{1.0}}}}};
    });
    EXPECT_EQ(code_of([&] { embed_remote({"x"}, EndpointConfig{count.url()}); }), ErrorCode::BadResponse);

    lateindex::testkit::FakeEndpoint text("/embed", [](const json&, int&) { return json("not json"); });
    EXPECT_EQ(code_of([&] { embed_remote({"x"}, EndpointConfig{text.url()}); }), ErrorCode::BadResponse);

    lateindex::testkit::FakeEndpoint err("/embed", [](const json&, int& status) {
        status = 500;
        return json{{"error", "boom"}};
    });
    EXPECT_EQ(code_of([&] { embed_remote({"x"}, EndpointConfig{err.url()}); }), ErrorCode::TransportFailure);

    lateindex::testkit::FakeEndpoint slow("/embed", [](const json&, int&) {
        std::this_thread::sleep_for(std::chrono::milliseconds(400));
        return json{{"embeddings", {{{1.0}}}}};
    });
    EXPECT_EQ(code_of([&] { embed_remote({"x"}, EndpointConfig{slow.url(), std::chrono::milliseconds(100)}); }),
              ErrorCode::TransportFailure);

    EXPECT_EQ(code_of([] { embed_remote({"x"}, std::nullopt); }), ErrorCode::EndpointUnconfigured);
    EXPECT_EQ(code_of([] { embed_remote({"x"}, EndpointConfig{""}); }), ErrorCode::EndpointUnconfigured);
    EXPECT_EQ(code_of([] { embed_remote({"x"}, EndpointConfig{"http://127.0.0.1:1/embed"}); }),
              ErrorCode::TransportFailure);
}
