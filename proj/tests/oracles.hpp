#pragma once

// Independent brute-force oracles for the spec'd derived values. These
// deliberately re-derive every quantity from raw inputs with their own
// loops; they must never call into the implementation paths they check.

#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "legrag/index.hpp"
#include "legrag/text.hpp"

namespace legrag::oracles {

struct ScoredId {
    double score;
    std::string id;
};

inline void sort_desc_with_id_tiebreak(std::vector<ScoredId>& v) {
    std::sort(v.begin(), v.end(), [](const ScoredId& a, const ScoredId& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
}

/// Cosine ranking by scanning every stored vector, query normalized once.
inline std::vector<ScoredId> cosine_scan(const HybridIndex& index,
                                         std::span<const float> query, std::size_t k) {
    double q_norm_sq = 0.0;
    for (float x : query) q_norm_sq += static_cast<double>(x) * x;
    const double inv = q_norm_sq > 0.0 ? 1.0 / std::sqrt(q_norm_sq) : 0.0;
    std::vector<double> q(query.size());
    for (std::size_t i = 0; i < query.size(); ++i) q[i] = query[i] * inv;

    std::vector<ScoredId> scored;
    for (std::size_t i = 0; i < index.size(); ++i) {
        const auto row = index.vector_of(i);
        double dot = 0.0;
        for (std::size_t d = 0; d < row.size(); ++d) dot += q[d] * row[d];
        scored.push_back({dot, index.segments()[i].segment_id});
    }
    sort_desc_with_id_tiebreak(scored);
    if (scored.size() > k) scored.resize(k);
    return scored;
}

/// BM25 recomputed from raw term counts of the segment texts.
inline std::vector<ScoredId> bm25_scan(const std::vector<Segment>& segments,
                                       const std::vector<std::string>& lexicon,
                                       const std::string& query, double k1, double b,
                                       std::size_t k) {
    const std::size_t n = segments.size();
    std::vector<std::vector<std::string>> seg_tokens(n);
    std::vector<std::size_t> doc_len(n);
    std::size_t total_len = 0;
    for (std::size_t i = 0; i < n; ++i) {
        seg_tokens[i] = text::analyze(segments[i].text, lexicon);
        doc_len[i] = seg_tokens[i].size();
        total_len += doc_len[i];
    }
    const double avgdl = n > 0 ? static_cast<double>(total_len) / static_cast<double>(n) : 0.0;

    std::map<std::string, std::size_t> df;
    std::vector<std::map<std::string, std::size_t>> tf(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& t : seg_tokens[i]) ++tf[i][t];
        for (const auto& [term, _] : tf[i]) ++df[term];
    }

    const auto query_tokens = text::analyze(query, lexicon);
    std::vector<ScoredId> scored;
    for (std::size_t i = 0; i < n; ++i) {
        double score = 0.0;
        bool touched = false;
        for (const auto& token : query_tokens) {
            auto it = tf[i].find(token);
            if (it == tf[i].end()) continue;
            touched = true;
            const double dfd = static_cast<double>(df[token]);
            const double idf =
                std::log(1.0 + (static_cast<double>(n) - dfd + 0.5) / (dfd + 0.5));
            const double tfd = static_cast<double>(it->second);
            const double dl = static_cast<double>(doc_len[i]);
            score += idf * (tfd * (k1 + 1.0)) / (tfd + k1 * (1.0 - b + b * dl / avgdl));
        }
        if (touched) scored.push_back({score, segments[i].segment_id});
    }
    sort_desc_with_id_tiebreak(scored);
    if (scored.size() > k) scored.resize(k);
    return scored;
}

/// RRF over two complete rankings: fused(s) = sum over lists containing s
/// of 1 / (k0 + rank).
inline std::vector<ScoredId> rrf_fuse(const std::vector<ScoredId>& vector_list,
                                      const std::vector<ScoredId>& lexical_list, double k0,
                                      std::size_t n_out) {
    std::map<std::string, double> fused;
    for (std::size_t r = 0; r < vector_list.size(); ++r) {
        fused[vector_list[r].id] += 1.0 / (k0 + static_cast<double>(r + 1));
    }
    for (std::size_t r = 0; r < lexical_list.size(); ++r) {
        fused[lexical_list[r].id] += 1.0 / (k0 + static_cast<double>(r + 1));
    }
    std::vector<ScoredId> out;
    for (const auto& [id, score] : fused) out.push_back({score, id});
    sort_desc_with_id_tiebreak(out);
    if (out.size() > n_out) out.resize(n_out);
    return out;
}

// -- retrieval metric oracles over an explicit boolean hit matrix ----------

struct HitQuery {
    std::vector<bool> hits; // hits[i]: is candidate at rank i+1 a gold hit
};

inline double recall_oracle(const std::vector<HitQuery>& queries, std::size_t k) {
    if (queries.empty()) return 0.0;
    std::size_t hit = 0;
    for (const auto& q : queries) {
        for (std::size_t i = 0; i < q.hits.size() && i < k; ++i) {
            if (q.hits[i]) {
                ++hit;
                break;
            }
        }
    }
    return static_cast<double>(hit) / static_cast<double>(queries.size());
}

inline double mrr_oracle(const std::vector<HitQuery>& queries, std::size_t k) {
    if (queries.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& q : queries) {
        for (std::size_t i = 0; i < q.hits.size() && i < k; ++i) {
            if (q.hits[i]) {
                sum += 1.0 / static_cast<double>(i + 1);
                break;
            }
        }
    }
    return sum / static_cast<double>(queries.size());
}

inline double map_oracle(const std::vector<HitQuery>& queries) {
    if (queries.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& q : queries) {
        std::size_t hits = 0;
        double ap = 0.0;
        for (std::size_t i = 0; i < q.hits.size(); ++i) {
            if (q.hits[i]) {
                ++hits;
                ap += static_cast<double>(hits) / static_cast<double>(i + 1);
            }
        }
        if (hits > 0) sum += ap / static_cast<double>(hits);
    }
    return sum / static_cast<double>(queries.size());
}

struct DsaOracleItem {
    std::vector<bool> hits;     // per top-K candidate
    std::vector<bool> selected; // per top-K candidate: did the model cite it
};

struct DsaOracleResult {
    std::size_t d = 0;
    std::size_t recalled = 0;
    std::optional<double> value;
};

inline DsaOracleResult dsa_oracle(const std::vector<DsaOracleItem>& items) {
    DsaOracleResult out;
    for (const auto& item : items) {
        bool any_hit = false;
        bool selected_hit = false;
        for (std::size_t i = 0; i < item.hits.size(); ++i) {
            if (item.hits[i]) {
                any_hit = true;
                if (i < item.selected.size() && item.selected[i]) selected_hit = true;
            }
        }
        if (!any_hit) continue;
        ++out.recalled;
        if (selected_hit) ++out.d;
    }
    if (out.recalled > 0) {
        out.value = static_cast<double>(out.d) / static_cast<double>(out.recalled);
    }
    return out;
}

/// Pearson over explicitly computed average ranks.
inline double rank_then_pearson(std::span<const double> a, std::span<const double> b) {
    auto ranks = [](std::span<const double> v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
        std::vector<double> r(v.size());
        std::size_t i = 0;
        while (i < v.size()) {
            std::size_t j = i;
            while (j + 1 < v.size() && v[order[j + 1]] == v[order[i]]) ++j;
            for (std::size_t k = i; k <= j; ++k) {
                r[order[k]] = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            }
            i = j + 1;
        }
        return r;
    };
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double sa = 0.0;
    double sb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += ra[i];
        sb += rb[i];
    }
    const double ma = sa / n;
    const double mb = sb / n;
    double cov = 0.0;
    double va = 0.0;
    double vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    return cov / std::sqrt(va * vb);
}

} // namespace legrag::oracles
