#include "legrag/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "legrag/errors.hpp"
#include "legrag/text.hpp"

namespace legrag::metrics {

// ---------------------------------------------------------------------------
// gold matching
// ---------------------------------------------------------------------------

GoldResolver::GoldResolver(const std::vector<LegalDocument>& corpus) {
    for (const auto& doc : corpus) {
        for (const auto& seg : split_articles(doc)) {
            spans_.emplace(doc.doc_id + '\x1f' + *seg.article_label,
                           std::make_pair(seg.span_start, seg.span_end));
        }
    }
}

const std::pair<std::size_t, std::size_t>* GoldResolver::article_span(
    std::string_view doc_id, std::string_view label) const {
    auto it = spans_.find(std::string(doc_id) + '\x1f' + std::string(label));
    return it == spans_.end() ? nullptr : &it->second;
}

namespace {

/// Longest common (contiguous) substring length over code point tokens.
std::size_t lcs_substring(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    std::size_t best = 0;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1 : 0;
            best = std::max(best, cur[j]);
        }
        std::swap(prev, cur);
    }
    return best;
}

std::vector<std::string> code_point_tokens(std::string_view s) {
    std::vector<std::string> out;
    for (const auto& cp : text::decode_utf8(s)) {
        if (!text::is_space(cp.value)) {
            out.push_back(std::string(s.substr(cp.byte_offset, cp.byte_length)));
        }
    }
    return out;
}

bool key_text_hit(const Segment& candidate, const std::string& key_text, double threshold) {
    const auto key = code_point_tokens(key_text);
    if (key.empty()) return false;
    const auto cand = code_point_tokens(candidate.text);
    const double coverage =
        static_cast<double>(lcs_substring(cand, key)) / static_cast<double>(key.size());
    return coverage >= threshold;
}

bool article_hit(const Segment& candidate, const ReferenceSpan& gold, const GoldMatchRule& rule,
                 const GoldResolver* resolver) {
    if (candidate.granularity == Granularity::Article) {
        return candidate.article_label && *candidate.article_label == *gold.article_label;
    }
    // chunk candidate: needs the gold article's span
    if (resolver) {
        if (const auto* span = resolver->article_span(gold.doc_id, *gold.article_label)) {
            const std::size_t lo = std::max(candidate.span_start, span->first);
            const std::size_t hi = std::min(candidate.span_end, span->second);
            const std::size_t overlap = hi > lo ? hi - lo : 0;
            const std::size_t gold_len = span->second - span->first;
            if (gold_len == 0) return false;
            return static_cast<double>(overlap) / static_cast<double>(gold_len) >=
                   rule.span_coverage_threshold;
        }
    }
    if (gold.key_text) return key_text_hit(candidate, *gold.key_text, rule.key_text_threshold);
    raise(Errc::gold_unresolvable,
          "chunk candidate vs gold '" + *gold.article_label + "' of doc '" + gold.doc_id +
              "' needs a corpus resolver or key_text");
}

} // namespace

bool is_hit(const Segment& candidate, const ReferenceSpan& gold, const GoldMatchRule& rule,
            const GoldResolver* resolver) {
    if (candidate.doc_id != gold.doc_id) return false;
    if (!gold.article_label && !gold.key_text) {
        raise(Errc::gold_unresolvable, "gold span carries neither article_label nor key_text");
    }
    if (rule.mode == GoldMatchMode::ArticleLabel) {
        if (gold.article_label) return article_hit(candidate, gold, rule, resolver);
        return key_text_hit(candidate, *gold.key_text, rule.key_text_threshold);
    }
    if (gold.key_text) return key_text_hit(candidate, *gold.key_text, rule.key_text_threshold);
    return article_hit(candidate, gold, rule, resolver);
}

namespace {

bool any_hit(const Segment& candidate, const std::vector<ReferenceSpan>& golds,
             const GoldMatchRule& rule, const GoldResolver* resolver) {
    for (const auto& g : golds) {
        if (is_hit(candidate, g, rule, resolver)) return true;
    }
    return false;
}

} // namespace

std::optional<std::size_t> first_hit_rank(const RankedQuery& q, std::size_t k,
                                          const GoldMatchRule& rule,
                                          const GoldResolver* resolver) {
    const std::size_t limit = std::min(k, q.candidates.size());
    for (std::size_t i = 0; i < limit; ++i) {
        if (any_hit(q.candidates[i], q.golds, rule, resolver)) return i + 1;
    }
    return std::nullopt;
}

double recall_at_k(std::span<const RankedQuery> queries, std::size_t k,
                   const GoldMatchRule& rule, const GoldResolver* resolver) {
    if (queries.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& q : queries) {
        if (first_hit_rank(q, k, rule, resolver)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(queries.size());
}

double mrr_at_k(std::span<const RankedQuery> queries, std::size_t k, const GoldMatchRule& rule,
                const GoldResolver* resolver) {
    if (queries.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& q : queries) {
        if (auto rank = first_hit_rank(q, k, rule, resolver)) {
            sum += 1.0 / static_cast<double>(*rank);
        }
    }
    return sum / static_cast<double>(queries.size());
}

double mean_average_precision(std::span<const RankedQuery> queries, const GoldMatchRule& rule,
                              const GoldResolver* resolver) {
    if (queries.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& q : queries) {
        std::size_t hits = 0;
        double ap = 0.0;
        for (std::size_t i = 0; i < q.candidates.size(); ++i) {
            if (any_hit(q.candidates[i], q.golds, rule, resolver)) {
                ++hits;
                ap += static_cast<double>(hits) / static_cast<double>(i + 1);
            }
        }
        if (hits > 0) sum += ap / static_cast<double>(hits);
    }
    return sum / static_cast<double>(queries.size());
}

DsaResult dsa(std::span<const DsaItem> items, const GoldMatchRule& rule,
              const GoldResolver* resolver) {
    DsaResult out;
    for (const auto& item : items) {
        std::unordered_set<std::string> gold_hits;
        for (const auto& c : item.query.candidates) {
            if (any_hit(c, item.query.golds, rule, resolver)) gold_hits.insert(c.segment_id);
        }
        if (gold_hits.empty()) continue;
        ++out.recalled;
        for (const auto& id : item.related_docs) {
            if (gold_hits.count(id)) {
                ++out.selected;
                break;
            }
        }
    }
    if (out.recalled > 0) {
        out.value = static_cast<double>(out.selected) / static_cast<double>(out.recalled);
    }
    return out;
}

SelectionScore selection_score(std::span<const DsaItem> items, const GoldMatchRule& rule,
                               const GoldResolver* resolver) {
    std::size_t cited_total = 0;
    std::size_t gold_total = 0;
    std::size_t cited_hits = 0;
    for (const auto& item : items) {
        std::unordered_set<std::string> gold_hits;
        for (const auto& c : item.query.candidates) {
            if (any_hit(c, item.query.golds, rule, resolver)) gold_hits.insert(c.segment_id);
        }
        gold_total += gold_hits.size();
        std::unordered_set<std::string> cited(item.related_docs.begin(),
                                              item.related_docs.end());
        cited_total += cited.size();
        for (const auto& id : cited) {
            if (gold_hits.count(id)) ++cited_hits;
        }
    }
    SelectionScore s;
    s.precision = cited_total > 0
                      ? static_cast<double>(cited_hits) / static_cast<double>(cited_total)
                      : 0.0;
    s.recall = gold_total > 0
                   ? static_cast<double>(cited_hits) / static_cast<double>(gold_total)
                   : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

// ---------------------------------------------------------------------------
// text metrics
// ---------------------------------------------------------------------------

namespace {

/// Longest common subsequence length over tokens.
std::size_t lcs_subsequence(const std::vector<std::string>& a,
                            const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1
                                            : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

} // namespace

RougeScore rouge_l(std::string_view candidate, std::string_view reference, double beta) {
    const auto cand = text::metric_tokens(candidate);
    const auto ref = text::metric_tokens(reference);
    RougeScore s;
    if (cand.empty() || ref.empty()) return s;
    const double lcs = static_cast<double>(lcs_subsequence(cand, ref));
    s.precision = lcs / static_cast<double>(cand.size());
    s.recall = lcs / static_cast<double>(ref.size());
    const double b2 = beta * beta;
    const double denom = s.recall + b2 * s.precision;
    s.f1 = denom > 0.0 ? (1.0 + b2) * s.precision * s.recall / denom : 0.0;
    return s;
}

double bleu(std::string_view candidate, std::string_view reference) {
    const auto cand = text::metric_tokens(candidate);
    const auto ref = text::metric_tokens(reference);
    if (cand.empty() || ref.empty()) return 0.0;

    auto ngram_counts = [](const std::vector<std::string>& tokens, std::size_t n) {
        std::map<std::string, std::size_t> counts;
        if (tokens.size() < n) return counts;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::string key;
            for (std::size_t j = 0; j < n; ++j) {
                key += tokens[i + j];
                key.push_back('\x1f');
            }
            ++counts[key];
        }
        return counts;
    };

    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto cand_grams = ngram_counts(cand, n);
        std::size_t total = 0;
        for (const auto& [_, c] : cand_grams) total += c;
        if (total == 0) continue; // candidate shorter than n tokens
        const auto ref_grams = ngram_counts(ref, n);
        std::size_t matches = 0;
        for (const auto& [gram, c] : cand_grams) {
            auto it = ref_grams.find(gram);
            if (it != ref_grams.end()) matches += std::min(c, it->second);
        }
        const double p = matches > 0
                             ? static_cast<double>(matches) / static_cast<double>(total)
                             : 1.0 / static_cast<double>(total + 1);
        log_sum += 0.25 * std::log(p);
    }
    const double c = static_cast<double>(cand.size());
    const double r = static_cast<double>(ref.size());
    const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
    return bp * std::exp(log_sum);
}

CalibrationResult calibrate_threshold(std::span<const LabeledScore> samples) {
    if (samples.size() < 2) {
        raise(Errc::invalid_config, "calibration needs at least 2 labeled samples");
    }
    std::vector<double> scores;
    scores.reserve(samples.size());
    bool any_true = false;
    bool any_false = false;
    for (const auto& s : samples) {
        scores.push_back(s.score);
        (s.correct ? any_true : any_false) = true;
    }
    std::sort(scores.begin(), scores.end());
    const double lo_boundary = scores.front() - 1e-9;

    CalibrationResult out;
    if (!any_true || !any_false) {
        out.threshold = any_true ? lo_boundary : scores.back();
        out.agreement = 1.0;
        out.warnings.push_back(std::string(errc_name(Errc::degenerate_labels)) +
                               ": all samples labeled " +
                               (any_true ? "correct" : "incorrect") +
                               "; threshold set to the boundary");
        return out;
    }

    std::vector<double> thresholds{lo_boundary};
    for (std::size_t i = 0; i + 1 < scores.size(); ++i) {
        if (scores[i] != scores[i + 1]) {
            thresholds.push_back((scores[i] + scores[i + 1]) / 2.0);
        }
    }
    thresholds.push_back(scores.back());

    double best_agreement = -1.0;
    double best_threshold = lo_boundary;
    for (double t : thresholds) {
        std::size_t agree = 0;
        for (const auto& s : samples) {
            if ((s.score > t) == s.correct) ++agree;
        }
        const double agreement =
            static_cast<double>(agree) / static_cast<double>(samples.size());
        if (agreement > best_agreement) {
            best_agreement = agreement;
            best_threshold = t;
        }
    }
    out.threshold = best_threshold;
    out.agreement = best_agreement;
    return out;
}

double accuracy(std::span<const std::string> answers, std::span<const std::string> references,
                double threshold) {
    if (answers.size() != references.size()) {
        raise(Errc::alignment_mismatch,
              std::to_string(answers.size()) + " answers vs " +
                  std::to_string(references.size()) + " references");
    }
    if (answers.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        if (rouge_l(answers[i], references[i]).f1 > threshold) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(answers.size());
}

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        raise(Errc::length_mismatch, std::to_string(a.size()) + " vs " +
                                         std::to_string(b.size()) + " (need equal, >= 2)");
    }
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    double mean_a = 0.0;
    double mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += ra[i];
        mean_b += rb[i];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0;
    double var_a = 0.0;
    double var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = ra[i] - mean_a;
        const double db = rb[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) {
        raise(Errc::zero_variance, "rank variance is zero on one side");
    }
    return cov / std::sqrt(var_a * var_b);
}

} // namespace legrag::metrics
