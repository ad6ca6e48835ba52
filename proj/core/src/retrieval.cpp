#include "legrag/retrieval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "legrag/errors.hpp"
#include "legrag/jsonx.hpp"
#include "legrag/prompts.hpp"
#include "legrag/text.hpp"

namespace legrag {

void RetrievalConfig::validate() const {
    if (top_k == 0 || top_k > stage1_n) {
        raise(Errc::invalid_config, "require 0 < top_k <= stage1_n");
    }
    if (rrf_k0 <= 0) raise(Errc::invalid_config, "rrf k0 must be positive");
}

double RetrievalConfig::rrf(std::initializer_list<std::size_t> ranks) const {
    double fused = 0.0;
    for (std::size_t r : ranks) fused += 1.0 / (static_cast<double>(rrf_k0) + static_cast<double>(r));
    return fused;
}

AugmentedQuery augment_query(const std::string& query,
                             const std::vector<std::string>* lexicon,
                             ChatClient* extractor,
                             std::vector<std::string>* warnings) {
    AugmentedQuery out;
    out.original = query;
    out.vector_query = query;

    std::vector<std::string> entities;
    std::unordered_set<std::string> seen;
    auto add = [&](const std::string& term) {
        if (!term.empty() && seen.insert(term).second) entities.push_back(term);
    };

    if (lexicon) {
        for (const auto& term : *lexicon) {
            if (!term.empty() && query.find(term) != std::string::npos) add(term);
        }
    }
    if (extractor) {
        try {
            ChatRequest req;
            req.messages.push_back(
                {"user", render_prompt(entity_extraction_template(), {{"query", query}})});
            req.decoding = extractor->decoding();
            const std::string reply = extractor->complete(req);
            auto parsed = find_first_json(reply, /*allow_array=*/true);
            if (parsed && parsed->is_array()) {
                for (const auto& item : *parsed) {
                    if (item.is_string()) add(item.get<std::string>());
                }
            } else if (warnings) {
                warnings->push_back("entity extractor returned no JSON array; lexicon-only");
            }
        } catch (const std::exception& e) {
            if (warnings) {
                warnings->push_back(std::string("entity extractor failed (") + e.what() +
                                    "); lexicon-only");
            }
        }
    }

    out.entities = std::move(entities);
    out.lexical_query = query;
    for (const auto& e : out.entities) {
        out.lexical_query += ' ';
        out.lexical_query += e;
    }
    return out;
}

std::vector<ScoredSegment> first_stage(const HybridIndex& index,
                                       EmbeddingProvider& embedding,
                                       const AugmentedQuery& query,
                                       const RetrievalConfig& cfg) {
    cfg.validate();
    const std::vector<std::string> texts{query.vector_query};
    const auto query_vec = embed(embedding, texts).front();
    const auto vec_list = index.vector_search(query_vec, cfg.stage1_n);
    const auto lex_list = index.keyword_search(query.lexical_query, cfg.stage1_n);

    struct Fused {
        double fused = 0.0;
        double vector_score = 0.0;
        double lexical_score = 0.0;
    };
    std::unordered_map<std::string, Fused> by_id;
    const double k0 = static_cast<double>(cfg.rrf_k0);
    for (std::size_t r = 0; r < vec_list.size(); ++r) {
        auto& f = by_id[vec_list[r].segment_id];
        f.fused += 1.0 / (k0 + static_cast<double>(r + 1));
        f.vector_score = vec_list[r].vector_score;
    }
    for (std::size_t r = 0; r < lex_list.size(); ++r) {
        auto& f = by_id[lex_list[r].segment_id];
        f.fused += 1.0 / (k0 + static_cast<double>(r + 1));
        f.lexical_score = lex_list[r].lexical_score;
    }

    std::vector<ScoredSegment> fused;
    fused.reserve(by_id.size());
    for (auto& [id, f] : by_id) {
        ScoredSegment s;
        s.segment_id = id;
        s.vector_score = f.vector_score;
        s.lexical_score = f.lexical_score;
        s.fused_score = f.fused;
        s.stage = RetrievalStage::Stage1;
        fused.push_back(std::move(s));
    }
    std::sort(fused.begin(), fused.end(), [](const ScoredSegment& a, const ScoredSegment& b) {
        if (a.fused_score != b.fused_score) return a.fused_score > b.fused_score;
        return a.segment_id < b.segment_id;
    });
    if (fused.size() > cfg.stage1_n) fused.resize(cfg.stage1_n);
    return fused;
}

std::vector<ScoredSegment> rerank(const HybridIndex& index, Reranker* reranker,
                                  const std::string& query_text,
                                  const std::vector<ScoredSegment>& candidates,
                                  std::size_t top_k, bool fallback_passthrough,
                                  std::vector<std::string>* warnings) {
    auto passthrough = [&] {
        std::vector<ScoredSegment> out(candidates.begin(),
                                       candidates.begin() +
                                           static_cast<std::ptrdiff_t>(
                                               std::min(top_k, candidates.size())));
        for (auto& s : out) {
            s.rerank_score = s.fused_score;
            s.stage = RetrievalStage::Stage2;
        }
        return out;
    };

    if (candidates.empty() || top_k == 0) return {};
    if (reranker == nullptr || reranker->passthrough()) return passthrough();

    std::vector<std::string> docs;
    docs.reserve(candidates.size());
    for (const auto& c : candidates) {
        const Segment* seg = index.find_segment(c.segment_id);
        docs.push_back(seg ? seg->text : std::string{});
    }

    std::vector<double> scores;
    try {
        scores = reranker->score(query_text, docs);
        if (scores.size() != candidates.size()) {
            raise(Errc::reranker_unreachable,
                  "reranker returned " + std::to_string(scores.size()) + " scores for " +
                      std::to_string(candidates.size()) + " candidates");
        }
        for (double s : scores) {
            if (!std::isfinite(s)) {
                raise(Errc::reranker_unreachable, "reranker returned a non-finite score");
            }
        }
    } catch (const std::exception& e) {
        if (!fallback_passthrough) throw;
        if (warnings) {
            warnings->push_back(std::string("reranker failed (") + e.what() +
                                "); falling back to passthrough");
        }
        return passthrough();
    }

    std::vector<ScoredSegment> out = candidates;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].rerank_score = scores[i];
        out[i].stage = RetrievalStage::Stage2;
    }
    std::sort(out.begin(), out.end(), [](const ScoredSegment& a, const ScoredSegment& b) {
        if (*a.rerank_score != *b.rerank_score) return *a.rerank_score > *b.rerank_score;
        return a.segment_id < b.segment_id;
    });
    if (out.size() > top_k) out.resize(top_k);
    return out;
}

RetrievalRun retrieve(const HybridIndex& index, const std::string& query_text,
                      const RetrievalConfig& cfg, const RetrievalProviders& providers) {
    cfg.validate();
    RetrievalRun run;
    if (text::is_blank(query_text)) {
        run.query.original = query_text;
        run.query.vector_query = query_text;
        run.query.lexical_query = query_text;
        return run;
    }
    if (providers.embedding == nullptr) {
        raise(Errc::invalid_config, "retrieve requires an embedding provider");
    }
    if (providers.embedding->provider_id() != index.manifest().provider_id) {
        run.warnings.push_back("embedding provider '" + providers.embedding->provider_id() +
                               "' differs from index manifest '" +
                               index.manifest().provider_id + "'");
    }

    const std::vector<std::string>* lexicon =
        providers.lexicon ? providers.lexicon : &index.lexicon();
    run.query = cfg.entity_augmentation
                    ? augment_query(query_text, lexicon, providers.entity_extractor,
                                    &run.warnings)
                    : augment_query(query_text, nullptr, nullptr, nullptr);

    const auto t0 = std::chrono::steady_clock::now();
    run.stage1 = first_stage(index, *providers.embedding, run.query, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    run.topk = rerank(index, providers.reranker, run.query.original, run.stage1, cfg.top_k,
                      cfg.rerank_fallback_passthrough, &run.warnings);
    const auto t2 = std::chrono::steady_clock::now();
    run.stage1_millis = std::chrono::duration<double, std::milli>(t1 - t0).count();
    run.stage2_millis = std::chrono::duration<double, std::milli>(t2 - t1).count();
    return run;
}

} // namespace legrag
