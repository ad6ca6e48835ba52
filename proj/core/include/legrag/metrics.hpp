#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "legrag/corpus.hpp"
#include "legrag/splitter.hpp"

namespace legrag::metrics {

enum class GoldMatchMode { ArticleLabel, KeyTextOverlap };

struct GoldMatchRule {
    GoldMatchMode mode = GoldMatchMode::ArticleLabel;
    double key_text_threshold = 0.8;     // LCSubstring coverage of key_text
    double span_coverage_threshold = 0.8; // chunk coverage of the gold article span
};

/// Resolves (doc_id, canonical article label) to the article's byte span,
/// built by article-splitting each corpus document once.
class GoldResolver {
public:
    GoldResolver() = default;
    explicit GoldResolver(const std::vector<LegalDocument>& corpus);

    const std::pair<std::size_t, std::size_t>* article_span(std::string_view doc_id,
                                                            std::string_view label) const;

private:
    std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> spans_;
};

/// Whether a retrieved segment counts as the annotated reference content.
/// ArticleLabel mode: doc match plus label match (article candidates) or
/// sufficient coverage of the gold article span (chunk candidates).
/// KeyTextOverlap mode: doc match plus longest-common-substring coverage of
/// key_text at or above the rule threshold. Either mode falls back to the
/// other anchor when its own is absent from the gold span.
bool is_hit(const Segment& candidate, const ReferenceSpan& gold, const GoldMatchRule& rule,
            const GoldResolver* resolver = nullptr);

/// One evaluated query: ranked candidates (best first) plus its golds.
struct RankedQuery {
    std::string entry_id;
    std::vector<Segment> candidates;
    std::vector<ReferenceSpan> golds;
    QuestionType question_type = QuestionType::Other;
};

/// Position (1-based) of the first gold hit within the top K, if any.
std::optional<std::size_t> first_hit_rank(const RankedQuery& q, std::size_t k,
                                          const GoldMatchRule& rule,
                                          const GoldResolver* resolver = nullptr);

double recall_at_k(std::span<const RankedQuery> queries, std::size_t k,
                   const GoldMatchRule& rule, const GoldResolver* resolver = nullptr);

double mrr_at_k(std::span<const RankedQuery> queries, std::size_t k, const GoldMatchRule& rule,
                const GoldResolver* resolver = nullptr);

/// Mean over queries of average precision over the hit positions in the
/// scored list; queries without hits contribute 0.
double mean_average_precision(std::span<const RankedQuery> queries, const GoldMatchRule& rule,
                              const GoldResolver* resolver = nullptr);

struct DsaItem {
    RankedQuery query;                     // candidates = the top-K list
    std::vector<std::string> related_docs; // segment ids the generator cited
};

struct DsaResult {
    std::size_t selected = 0;      // d
    std::size_t recalled = 0;      // D: queries whose top-K contains a gold hit
    std::optional<double> value;   // d / D; empty when D == 0 (explicitly undefined)
};

DsaResult dsa(std::span<const DsaItem> items, const GoldMatchRule& rule,
              const GoldResolver* resolver = nullptr);

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// ROUGE-L over the metric tokenization; beta = 1 by default, the classic
/// recall-weighted beta is available for comparison runs.
RougeScore rouge_l(std::string_view candidate, std::string_view reference, double beta = 1.0);

/// BLEU-4, uniform weights, add-one smoothing on zero n-gram matches,
/// brevity penalty. Orders longer than the candidate are skipped.
double bleu(std::string_view candidate, std::string_view reference);

struct LabeledScore {
    double score = 0.0;
    bool correct = false;
};

struct CalibrationResult {
    double threshold = 0.5;
    double agreement = 0.0;
    std::vector<std::string> warnings;
};

/// Exhaustive scan over midpoints between consecutive distinct scores (plus
/// the accept-all and reject-all boundaries); maximizes agreement with the
/// human labels under the strict score > threshold decision, ties toward
/// the smallest threshold. One-class inputs return a boundary plus warning.
CalibrationResult calibrate_threshold(std::span<const LabeledScore> samples);

/// Fraction of answers whose ROUGE-L F1 strictly exceeds the threshold.
double accuracy(std::span<const std::string> answers, std::span<const std::string> references,
                double threshold);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

/// Document-selection precision/recall/F1: cited segment ids against the
/// gold-hit segments of each top-K list, micro-averaged over queries.
struct SelectionScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

SelectionScore selection_score(std::span<const DsaItem> items, const GoldMatchRule& rule,
                               const GoldResolver* resolver = nullptr);

} // namespace legrag::metrics
