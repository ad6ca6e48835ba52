#include <benchmark/benchmark.h>

#include "legrag/index.hpp"
#include "legrag/retrieval.hpp"
#include "legrag/splitter.hpp"
#include "helpers.hpp"

using namespace legrag;

namespace {

struct BenchFixture {
    testing::SyntheticCorpus synth;
    std::vector<Segment> segments;
    DeterministicEmbeddingProvider provider{256};
    HybridIndex index;

    explicit BenchFixture(int docs, int arts) {
        synth = testing::make_statutes(docs, arts, 7);
        segments = split_corpus(synth.docs, SplitStrategy::ChunkPlusArticle, {});
        index = HybridIndex::build(segments, provider);
    }
};

BenchFixture& fixture(int docs) {
    static BenchFixture small(8, 10);
    static BenchFixture large(40, 25);
    return docs <= 8 ? small : large;
}

} // namespace

static void BM_SplitDual(benchmark::State& state) {
    const auto synth = testing::make_statutes(1, static_cast<int>(state.range(0)), 11);
    SplitConfig cfg;
    for (auto _ : state) {
        auto segs = split_dual(synth.docs[0], cfg);
        benchmark::DoNotOptimize(segs);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SplitDual)->RangeMultiplier(4)->Range(8, 512)->Complexity();

static void BM_KeywordSearch(benchmark::State& state) {
    auto& fx = fixture(static_cast<int>(state.range(0)));
    const std::string query = fx.synth.entries[3].question;
    for (auto _ : state) {
        auto hits = fx.index.keyword_search(query, 20);
        benchmark::DoNotOptimize(hits);
    }
    state.counters["segments"] = static_cast<double>(fx.index.size());
}
BENCHMARK(BM_KeywordSearch)->Arg(8)->Arg(40);

static void BM_VectorSearch(benchmark::State& state) {
    auto& fx = fixture(static_cast<int>(state.range(0)));
    const auto qv = fx.provider.embed_one(fx.synth.entries[3].question);
    for (auto _ : state) {
        auto hits = fx.index.vector_search(qv, 20);
        benchmark::DoNotOptimize(hits);
    }
    state.counters["segments"] = static_cast<double>(fx.index.size());
}
BENCHMARK(BM_VectorSearch)->Arg(8)->Arg(40);

static void BM_FirstStageFusion(benchmark::State& state) {
    auto& fx = fixture(static_cast<int>(state.range(0)));
    RetrievalConfig cfg;
    const auto q = augment_query(fx.synth.entries[5].question, nullptr, nullptr);
    for (auto _ : state) {
        auto fused = first_stage(fx.index, fx.provider, q, cfg);
        benchmark::DoNotOptimize(fused);
    }
    state.counters["segments"] = static_cast<double>(fx.index.size());
}
BENCHMARK(BM_FirstStageFusion)->Arg(8)->Arg(40);

static void BM_EmbedOne(benchmark::State& state) {
    DeterministicEmbeddingProvider provider(static_cast<std::size_t>(state.range(0)));
    const std::string text = testing::article_sentence(1, 12, *(new std::mt19937(3)));
    for (auto _ : state) {
        auto v = provider.embed_one(text);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_EmbedOne)->Arg(64)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
