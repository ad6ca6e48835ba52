#include <doctest.h>

#include <random>

#include "legrag/errors.hpp"
#include "legrag/retrieval.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace legrag;

namespace {

struct Fixture {
    testing::SyntheticCorpus synth;
    std::vector<Segment> segments;
    DeterministicEmbeddingProvider provider{128};
    HybridIndex index;

    explicit Fixture(int docs = 4, int arts = 5) {
        synth = testing::make_statutes(docs, arts);
        segments = split_corpus(synth.docs, SplitStrategy::ChunkPlusArticle, {});
        index = HybridIndex::build(segments, provider);
    }

    RetrievalProviders providers(Reranker* reranker = nullptr,
                                 ChatClient* extractor = nullptr) {
        RetrievalProviders p;
        p.embedding = &provider;
        p.reranker = reranker;
        p.entity_extractor = extractor;
        return p;
    }
};

} // namespace

TEST_CASE("augment_query") {
    SUBCASE("lexicon substring hit") {
        const std::vector<std::string> lexicon{"实名登记", "食品安全"};
        const auto q = augment_query("购买微型无人机必须实名登记吗？", &lexicon, nullptr);
        REQUIRE(q.entities.size() == 1);
        CHECK(q.entities[0] == "实名登记");
        CHECK(q.lexical_query.find(q.original) == 0); // contains original verbatim
        CHECK(q.lexical_query.find("实名登记") != std::string::npos);
        CHECK(q.vector_query == q.original);
    }
    SUBCASE("disabled augmentation passes through") {
        const auto q = augment_query("任意问题", nullptr, nullptr);
        CHECK(q.entities.empty());
        CHECK(q.lexical_query == q.original);
    }
    SUBCASE("scripted extractor terms deduplicate against the lexicon") {
        const std::vector<std::string> lexicon{"民用无人驾驶航空器"};
        auto extractor = ScriptedChatClient(
            [](const ChatRequest&, std::size_t) {
                return std::string(R"(["民用无人驾驶航空器","实名登记"])");
            });
        const auto q = augment_query("民用无人驾驶航空器需要实名登记吗", &lexicon, &extractor);
        CHECK(std::count(q.entities.begin(), q.entities.end(), "民用无人驾驶航空器") == 1);
        CHECK(std::count(q.entities.begin(), q.entities.end(), "实名登记") == 1);
    }
    SUBCASE("extractor failure degrades to lexicon-only with warning") {
        const std::vector<std::string> lexicon{"登记"};
        auto broken = ScriptedChatClient([](const ChatRequest&, std::size_t) -> std::string {
            raise(Errc::client_unreachable, "scripted outage");
        });
        std::vector<std::string> warnings;
        const auto q = augment_query("办理登记", &lexicon, &broken, &warnings);
        CHECK(q.entities == std::vector<std::string>{"登记"});
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("extractor failed") != std::string::npos);
    }
    SUBCASE("non-array reply records a warning") {
        auto prose = ScriptedChatClient(
            [](const ChatRequest&, std::size_t) { return std::string("no entities found"); });
        std::vector<std::string> warnings;
        const auto q = augment_query("问题", nullptr, &prose, &warnings);
        CHECK(q.entities.empty());
        CHECK(warnings.size() == 1);
    }
}

TEST_CASE("RRF formula instances") {
    RetrievalConfig cfg;
    CHECK(cfg.rrf({1, 1}) == doctest::Approx(2.0 / 61.0).epsilon(1e-15));
    CHECK(cfg.rrf({3}) == doctest::Approx(1.0 / 63.0).epsilon(1e-15));
}

TEST_CASE("first_stage: fused ranking equals the exhaustive RRF oracle") {
    Fixture fx(4, 5); // 4 docs x 5 articles -> 20 articles + chunks
    RetrievalConfig cfg;
    cfg.stage1_n = 200; // larger than the corpus: both lists complete
    cfg.top_k = 5;

    std::mt19937 rng(41);
    std::uniform_int_distribution<std::size_t> pick(0, fx.synth.entries.size() - 1);
    for (int i = 0; i < 10; ++i) {
        const std::string question = fx.synth.entries[pick(rng)].question;
        const auto q = augment_query(question, nullptr, nullptr);
        const auto got = first_stage(fx.index, fx.provider, q, cfg);

        const auto qv = fx.provider.embed_one(q.vector_query);
        const auto vec_full = oracles::cosine_scan(fx.index, qv, fx.index.size());
        const auto lex_full =
            oracles::bm25_scan(fx.segments, {}, q.lexical_query, 1.5, 0.75, fx.index.size());
        const auto want =
            oracles::rrf_fuse(vec_full, lex_full, 60.0, cfg.stage1_n);

        REQUIRE(got.size() == want.size());
        for (std::size_t j = 0; j < got.size(); ++j) {
            CHECK(got[j].segment_id == want[j].id);
            CHECK(got[j].fused_score == want[j].score); // bitwise
        }
    }
}

TEST_CASE("first_stage: stage1_n truncation keeps the fused order prefix") {
    Fixture fx;
    RetrievalConfig wide;
    wide.stage1_n = 100;
    wide.top_k = 5;
    RetrievalConfig narrow;
    narrow.stage1_n = 20;
    narrow.top_k = 5;
    const auto q = augment_query(fx.synth.entries[3].question, nullptr, nullptr);
    const auto full = first_stage(fx.index, fx.provider, q, wide);
    const auto cut = first_stage(fx.index, fx.provider, q, narrow);
    REQUIRE(cut.size() <= 20);
    // the narrow run fuses over top-20 sublists, so ranks match only where
    // both lists agree; check the basic contract: ordering + size
    for (std::size_t i = 0; i + 1 < cut.size(); ++i) {
        const bool ordered = cut[i].fused_score > cut[i + 1].fused_score ||
                             (cut[i].fused_score == cut[i + 1].fused_score &&
                              cut[i].segment_id < cut[i + 1].segment_id);
        CHECK(ordered);
    }
    CHECK(full.size() >= cut.size());
}

TEST_CASE("rerank") {
    Fixture fx;
    RetrievalConfig cfg;
    const auto q = augment_query(fx.synth.entries[0].question, nullptr, nullptr);
    const auto stage1 = first_stage(fx.index, fx.provider, q, cfg);
    REQUIRE(stage1.size() >= 5);

    SUBCASE("identity passthrough keeps fused order and truncates") {
        const auto top = rerank(fx.index, nullptr, q.original, stage1, 5);
        REQUIRE(top.size() == 5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(top[i].segment_id == stage1[i].segment_id);
            CHECK(top[i].stage == RetrievalStage::Stage2);
            REQUIRE(top[i].rerank_score.has_value());
            CHECK(*top[i].rerank_score == stage1[i].fused_score);
        }
        IdentityReranker identity;
        const auto top2 = rerank(fx.index, &identity, q.original, stage1, 5);
        REQUIRE(top2.size() == 5);
        CHECK(top2[0].segment_id == top[0].segment_id);
    }
    SUBCASE("scripted scores reorder") {
        // highest score to the lexicographically last candidate id
        ScriptedReranker scripted([&](const std::string&, const std::string& doc) {
            return static_cast<double>(doc.size() % 97) / 97.0;
        });
        const auto top = rerank(fx.index, &scripted, q.original, stage1, 3);
        REQUIRE(top.size() == 3);
        CHECK(*top[0].rerank_score >= *top[1].rerank_score);
        CHECK(*top[1].rerank_score >= *top[2].rerank_score);
    }
    SUBCASE("scripted two-candidate example") {
        std::vector<ScoredSegment> two(stage1.begin(), stage1.begin() + 2);
        const std::string first_text = fx.index.find_segment(two[0].segment_id)->text;
        ScriptedReranker scripted([&](const std::string&, const std::string& doc) {
            return doc == first_text ? 0.2 : 0.9;
        });
        const auto top = rerank(fx.index, &scripted, q.original, two, 1);
        REQUIRE(top.size() == 1);
        CHECK(top[0].segment_id == two[1].segment_id);
    }
    SUBCASE("top_k larger than candidate count returns all") {
        std::vector<ScoredSegment> three(stage1.begin(), stage1.begin() + 3);
        const auto top = rerank(fx.index, nullptr, q.original, three, 5);
        CHECK(top.size() == 3);
    }
    SUBCASE("reranker failure falls back to passthrough with warning") {
        ScriptedReranker broken([](const std::string&, const std::string&) -> double {
            raise(Errc::reranker_unreachable, "scripted outage");
        });
        std::vector<std::string> warnings;
        const auto top = rerank(fx.index, &broken, q.original, stage1, 5, true, &warnings);
        REQUIRE(top.size() == 5);
        CHECK(top[0].segment_id == stage1[0].segment_id);
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("falling back") != std::string::npos);

        CHECK_THROWS_AS(rerank(fx.index, &broken, q.original, stage1, 5, false), Error);
    }
}

TEST_CASE("retrieve") {
    Fixture fx;
    RetrievalConfig cfg;

    SUBCASE("verbatim article text ranks its article first") {
        for (const auto& entry : fx.synth.entries) {
            const auto run = retrieve(fx.index, entry.question, cfg, fx.providers());
            REQUIRE_FALSE(run.topk.empty());
            const Segment* top = fx.index.find_segment(run.topk[0].segment_id);
            REQUIRE(top != nullptr);
            // the top hit must be the article segment (or a chunk covering it)
            CHECK(top->doc_id == entry.doc_id);
            if (top->granularity == Granularity::Article) {
                CHECK(top->article_label == entry.references[0].article_label);
            }
        }
    }
    SUBCASE("empty corpus: empty run, no error") {
        DeterministicEmbeddingProvider provider(128);
        const auto empty = HybridIndex::build({}, provider);
        RetrievalProviders p;
        p.embedding = &provider;
        const auto run = retrieve(empty, "任何问题", cfg, p);
        CHECK(run.stage1.empty());
        CHECK(run.topk.empty());
    }
    SUBCASE("blank query: empty run, no error") {
        const auto run = retrieve(fx.index, "  \n", cfg, fx.providers());
        CHECK(run.stage1.empty());
        CHECK(run.topk.empty());
    }
    SUBCASE("determinism modulo timings") {
        const auto a = retrieve(fx.index, fx.synth.entries[1].question, cfg, fx.providers());
        const auto b = retrieve(fx.index, fx.synth.entries[1].question, cfg, fx.providers());
        REQUIRE(a.stage1.size() == b.stage1.size());
        for (std::size_t i = 0; i < a.stage1.size(); ++i) {
            CHECK(a.stage1[i].segment_id == b.stage1[i].segment_id);
            CHECK(a.stage1[i].fused_score == b.stage1[i].fused_score);
        }
        REQUIRE(a.topk.size() == b.topk.size());
        for (std::size_t i = 0; i < a.topk.size(); ++i) {
            CHECK(a.topk[i].segment_id == b.topk[i].segment_id);
        }
    }
    SUBCASE("topk is a subset/prefix of stage1 under passthrough") {
        const auto run = retrieve(fx.index, fx.synth.entries[2].question, cfg, fx.providers());
        CHECK(run.topk.size() == std::min<std::size_t>(cfg.top_k, run.stage1.size()));
        for (std::size_t i = 0; i < run.topk.size(); ++i) {
            CHECK(run.topk[i].segment_id == run.stage1[i].segment_id);
        }
    }
    SUBCASE("provider mismatch against the index manifest is surfaced") {
        DeterministicEmbeddingProvider other(64);
        RetrievalProviders p;
        p.embedding = &other;
        CHECK_THROWS_AS(retrieve(fx.index, "问题", cfg, p), Error); // dimension mismatch too
        // matching dimension but a different id: warning only
        DeterministicEmbeddingProvider same_dim(128);
        // same id/dimension as the build provider -> no warning
        const auto run = retrieve(fx.index, "问题文字", cfg, fx.providers());
        CHECK(run.warnings.empty());
    }
    SUBCASE("augmentation changes only the lexical query") {
        RetrievalConfig aug = cfg;
        aug.entity_augmentation = true;
        RetrievalConfig no_aug = cfg;
        no_aug.entity_augmentation = false;
        std::vector<std::string> lexicon{"经营者"};
        auto p = fx.providers();
        p.lexicon = &lexicon;
        const std::string question = "经营者应当如何办理？";
        const auto with = retrieve(fx.index, question, aug, p);
        const auto without = retrieve(fx.index, question, no_aug, p);
        CHECK(with.query.vector_query == without.query.vector_query);
        CHECK(with.query.lexical_query != without.query.lexical_query);
    }
}
