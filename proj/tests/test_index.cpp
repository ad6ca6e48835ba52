#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "legrag/errors.hpp"
#include "legrag/index.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace legrag;

namespace {

std::vector<Segment> synth_segments(int docs, int arts) {
    const auto synth = testing::make_statutes(docs, arts);
    return split_corpus(synth.docs, SplitStrategy::ChunkPlusArticle, {});
}

double l2(const std::vector<float>& v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

} // namespace

TEST_CASE("deterministic provider: pure function, unit norm") {
    DeterministicEmbeddingProvider provider(256);
    const std::vector<std::string> texts{"第十九条", "第十九条", "完全无关的另一段文字"};
    const auto vecs = embed(provider, texts);
    REQUIRE(vecs.size() == 3);
    CHECK(vecs[0] == vecs[1]); // identical input, identical vector
    for (const auto& v : vecs) {
        CHECK(v.size() == 256);
        CHECK(std::abs(l2(v) - 1.0) <= 1e-6);
    }
    // self-cosine strictly exceeds cosine with unrelated text
    double self = 0.0;
    double cross = 0.0;
    for (std::size_t i = 0; i < 256; ++i) {
        self += static_cast<double>(vecs[0][i]) * vecs[1][i];
        cross += static_cast<double>(vecs[0][i]) * vecs[2][i];
    }
    CHECK(self == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(self > cross);
}

TEST_CASE("build: empty corpus gives a valid empty index") {
    DeterministicEmbeddingProvider provider(64);
    const auto idx = HybridIndex::build({}, provider);
    CHECK(idx.size() == 0);
    CHECK(idx.vector_search(std::vector<float>(64, 0.1f), 5).empty());
    CHECK(idx.keyword_search("任何查询", 5).empty());
}

TEST_CASE("build: sub-indexes cover every segment; duplicate ids rejected") {
    DeterministicEmbeddingProvider provider(64);
    auto segments = synth_segments(2, 5);
    const auto n = segments.size();
    const auto idx = HybridIndex::build(segments, provider);
    CHECK(idx.size() == n);
    CHECK(idx.manifest().segment_count == n);
    CHECK(idx.manifest().dimension == 64);
    for (const auto& s : idx.segments()) {
        CHECK(idx.find_segment(s.segment_id) != nullptr);
    }

    auto dupes = segments;
    dupes.push_back(segments.front());
    CHECK_THROWS_AS(HybridIndex::build(dupes, provider), Error);
}

TEST_CASE("vector_search basics") {
    DeterministicEmbeddingProvider provider(128);
    const auto segments = synth_segments(3, 4);
    const auto idx = HybridIndex::build(segments, provider);

    SUBCASE("self similarity puts the segment first at score ~1") {
        const auto target = idx.segments()[5];
        const auto qv = provider.embed_one(target.text);
        const auto hits = idx.vector_search(qv, 3);
        REQUIRE_FALSE(hits.empty());
        CHECK(hits[0].segment_id == target.segment_id);
        CHECK(hits[0].vector_score == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("k = 0 empty, k > corpus returns all") {
        const auto qv = provider.embed_one("x");
        CHECK(idx.vector_search(qv, 0).empty());
        CHECK(idx.vector_search(qv, 10000).size() == idx.size());
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(idx.vector_search(std::vector<float>(4, 0.5f), 3), Error);
    }
    SUBCASE("prefix property: results for k1 prefix results for k2 >= k1") {
        const auto qv = provider.embed_one("抽样检验");
        const auto small = idx.vector_search(qv, 4);
        const auto large = idx.vector_search(qv, 9);
        REQUIRE(small.size() <= large.size());
        for (std::size_t i = 0; i < small.size(); ++i) {
            CHECK(small[i].segment_id == large[i].segment_id);
        }
    }
}

TEST_CASE("vector_search equals brute-force cosine scan") {
    DeterministicEmbeddingProvider provider(96);
    const auto segments = synth_segments(5, 5);
    const auto idx = HybridIndex::build(segments, provider);
    std::mt19937 rng(17);
    std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
    for (int q = 0; q < 20; ++q) {
        const auto qv = provider.embed_one(idx.segments()[pick(rng)].text + "补充问题");
        const auto got = idx.vector_search(qv, 10);
        const auto want = oracles::cosine_scan(idx, qv, 10);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].segment_id == want[i].id);
            CHECK(got[i].vector_score == want[i].score); // bitwise
        }
    }
}

TEST_CASE("keyword_search basics") {
    DeterministicEmbeddingProvider provider(64);

    SUBCASE("single segment corpus returns it for its own text") {
        LegalDocument doc;
        doc.doc_id = "d";
        doc.body = "第一条 经营者应当办理登记。";
        const auto segments = split_articles(doc);
        const auto idx = HybridIndex::build(segments, provider);
        const auto hits = idx.keyword_search(doc.body, 5);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].segment_id == segments[0].segment_id);
        CHECK(hits[0].lexical_score > 0.0);
    }
    SUBCASE("query with no indexed terms is empty") {
        const auto idx = HybridIndex::build(synth_segments(2, 3), provider);
        CHECK(idx.keyword_search("zzz qqq", 5).empty());
        CHECK(idx.keyword_search("", 5).empty());
    }
}

TEST_CASE("keyword_search equals brute-force BM25 evaluation") {
    DeterministicEmbeddingProvider provider(64);
    const auto synth = testing::make_statutes(5, 5);
    const auto segments = split_corpus(synth.docs, SplitStrategy::ChunkPlusArticle, {});
    const auto idx = HybridIndex::build(segments, provider);
    std::mt19937 rng(29);
    std::uniform_int_distribution<std::size_t> pick(0, synth.entries.size() - 1);
    for (int q = 0; q < 20; ++q) {
        const std::string query = synth.entries[pick(rng)].question;
        const auto got = idx.keyword_search(query, 15);
        const auto want = oracles::bm25_scan(segments, {}, query, 1.5, 0.75, 15);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].segment_id == want[i].id);
            CHECK(got[i].lexical_score == want[i].score); // bitwise
        }
    }
}

TEST_CASE("persistence: round-trip, rebuild determinism, corruption") {
    testing::TempDir tmp("legrag-index");
    DeterministicEmbeddingProvider provider(64);
    const auto segments = synth_segments(3, 4);
    const auto idx = HybridIndex::build(segments, provider, {}, {"经营者", "登记"});
    const auto path = (tmp.path() / "index.lgdx").string();
    idx.save(path);

    SUBCASE("round-trip yields identical search results") {
        const auto loaded = HybridIndex::load(path);
        CHECK(loaded.size() == idx.size());
        CHECK(loaded.manifest().corpus_hash == idx.manifest().corpus_hash);
        CHECK(loaded.lexicon() == idx.lexicon());
        const auto qv = provider.embed_one(segments[0].text);
        const auto a = idx.vector_search(qv, 8);
        const auto b = loaded.vector_search(qv, 8);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].segment_id == b[i].segment_id);
            CHECK(a[i].vector_score == b[i].vector_score);
        }
        const auto ka = idx.keyword_search(segments[0].text, 8);
        const auto kb = loaded.keyword_search(segments[0].text, 8);
        REQUIRE(ka.size() == kb.size());
        for (std::size_t i = 0; i < ka.size(); ++i) {
            CHECK(ka[i].segment_id == kb[i].segment_id);
            CHECK(ka[i].lexical_score == kb[i].lexical_score);
        }
    }
    SUBCASE("rebuild from identical inputs is byte-identical") {
        const auto rebuilt = HybridIndex::build(segments, provider, {}, {"经营者", "登记"});
        const auto path2 = (tmp.path() / "index2.lgdx").string();
        rebuilt.save(path2);
        CHECK(testing::read_text(path) == testing::read_text(path2));
    }
    SUBCASE("truncated file detected") {
        auto bytes = testing::read_text(path);
        bytes.resize(bytes.size() / 2);
        const auto bad = (tmp.path() / "trunc.lgdx").string();
        testing::write_text(bad, bytes);
        try {
            HybridIndex::load(bad);
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::corrupt_index);
        }
    }
    SUBCASE("flipped payload byte fails the checksum") {
        auto bytes = testing::read_text(path);
        bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x5A);
        const auto bad = (tmp.path() / "flip.lgdx").string();
        testing::write_text(bad, bytes);
        CHECK_THROWS_AS(HybridIndex::load(bad), Error);
    }
    SUBCASE("format version mismatch reported distinctly") {
        auto bytes = testing::read_text(path);
        bytes[4] = 9; // version byte after magic
        const auto bad = (tmp.path() / "ver.lgdx").string();
        testing::write_text(bad, bytes);
        try {
            HybridIndex::load(bad);
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::format_version_mismatch);
        }
    }
}
