#pragma once

#include <optional>
#include <string>
#include <vector>

#include "legrag/clients.hpp"
#include "legrag/prompts.hpp"

namespace legrag::judge {

/// Dimension maxima. Fixed by the evaluation protocol; any override must
/// still sum to 100.
struct JudgeWeights {
    double relevance_max = 30.0;
    double accuracy_max = 40.0;
    double completeness_max = 20.0;
    double fluency_max = 10.0;

    void validate() const; // the four maxima must sum to exactly 100
};

struct JudgeScore {
    double relevance = 0.0;
    double accuracy = 0.0;
    double completeness = 0.0;
    double fluency = 0.0;
    double total = 0.0;     // recomputed sum of the four dimensions
    double llm_score = 0.0; // total / 100
    std::vector<std::string> warnings;
};

struct JudgeSample {
    std::string entry_id;
    std::string query;
    std::vector<std::string> retrieved_docs; // rerank order
    std::string generated_answer;
    std::string reference_answer;
};

/// Evaluation prompt with the four placeholders substituted; retrieved docs
/// are concatenated with numbered separators in rerank order.
/// Throws Error{missing_field} when any input is empty.
std::string build_judge_prompt(const JudgeSample& sample,
                               const PromptTemplate* tmpl = nullptr);

/// Extracts the first JSON object from the reply (tolerating prose and code
/// fences), bounds-checks each dimension and recomputes the total; a
/// model-supplied total that disagrees is overridden with a warning.
JudgeScore parse_judge_reply(std::string_view reply, const JudgeWeights& weights = {});

/// One judged sample. Requires deterministic decoding (temperature 0,
/// top_p 1.0) on the client; retries once with a JSON-only nudge when the
/// reply holds no JSON.
JudgeScore judge_one(ChatClient& client, const JudgeSample& sample,
                     const JudgeWeights& weights = {}, const PromptTemplate* tmpl = nullptr);

struct JudgeBatchResult {
    /// Parallel to the input; empty optionals mark per-sample failures.
    std::vector<std::optional<JudgeScore>> scores;
    std::vector<std::string> failures; // "entry_id: reason" per failed sample
    std::optional<double> mean_llm_score; // over successes; empty when none
    std::size_t excluded = 0;
};

JudgeBatchResult judge_batch(ChatClient& client, std::span<const JudgeSample> samples,
                             const JudgeWeights& weights = {},
                             const PromptTemplate* tmpl = nullptr, std::size_t jobs = 1);

/// Reported agreement between this protocol's scores and expert review.
inline constexpr double kReferenceSpearman = 0.87;
inline constexpr double kCredibilityFloor = 0.8;

struct CredibilityReport {
    double rho = 0.0;
    bool below_floor = false;
    double reference_rho = kReferenceSpearman;
};

CredibilityReport credibility_check(std::span<const double> llm_scores,
                                    std::span<const double> human_scores);

} // namespace legrag::judge
