#pragma once

#include <optional>
#include <string>
#include <vector>

#include "legrag/clients.hpp"
#include "legrag/index.hpp"

namespace legrag {

struct RetrievalConfig {
    std::size_t stage1_n = 20;
    std::size_t top_k = 5;
    int rrf_k0 = 60;
    bool entity_augmentation = true;
    std::string reranker_id;
    bool rerank_fallback_passthrough = true;

    void validate() const; // 0 < top_k <= stage1_n

    /// RRF fused score for a set of 1-based ranks, Σ 1/(k0 + rank).
    double rrf(std::initializer_list<std::size_t> ranks) const;
};

struct AugmentedQuery {
    std::string original;
    std::vector<std::string> entities;
    std::string lexical_query; // original + entities
    std::string vector_query;  // always the original
};

struct RetrievalRun {
    AugmentedQuery query;
    std::vector<ScoredSegment> stage1;
    std::vector<ScoredSegment> topk;
    double stage1_millis = 0.0;
    double stage2_millis = 0.0;
    std::vector<std::string> warnings;
};

struct RetrievalProviders {
    EmbeddingProvider* embedding = nullptr; // required by first_stage/retrieve
    Reranker* reranker = nullptr;           // null means identity passthrough
    ChatClient* entity_extractor = nullptr; // optional
    const std::vector<std::string>* lexicon = nullptr; // defaults to the index lexicon
};

/// Entities are lexicon terms found as substrings of the query plus, when an
/// extractor is configured, terms it returns; deduplicated, order-stable.
/// Extractor failures degrade to lexicon-only with a recorded warning.
AugmentedQuery augment_query(const std::string& query,
                             const std::vector<std::string>* lexicon,
                             ChatClient* extractor,
                             std::vector<std::string>* warnings = nullptr);

/// Hybrid stage 1: vector and keyword top-stage1_n lists fused by
/// reciprocal rank: fused(s) = Σ over lists containing s of 1/(k0 + rank).
/// Output ordered by fused score descending, segment_id ascending.
std::vector<ScoredSegment> first_stage(const HybridIndex& index,
                                       EmbeddingProvider& embedding,
                                       const AugmentedQuery& query,
                                       const RetrievalConfig& cfg);

/// Stage 2: scores candidates against query_text and keeps top_k by
/// rerank score (segment_id tie-break). A null or passthrough reranker
/// preserves the fused order; reranker failures optionally fall back to
/// passthrough with a recorded warning.
std::vector<ScoredSegment> rerank(const HybridIndex& index, Reranker* reranker,
                                  const std::string& query_text,
                                  const std::vector<ScoredSegment>& candidates,
                                  std::size_t top_k, bool fallback_passthrough = true,
                                  std::vector<std::string>* warnings = nullptr);

/// Full two-stage retrieval with trace. Blank queries produce an empty run.
RetrievalRun retrieve(const HybridIndex& index, const std::string& query_text,
                      const RetrievalConfig& cfg, const RetrievalProviders& providers);

} // namespace legrag
