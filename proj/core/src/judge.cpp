#include "legrag/judge.hpp"

#include <cmath>

#include "legrag/concurrency.hpp"
#include "legrag/errors.hpp"
#include "legrag/jsonx.hpp"
#include "legrag/metrics.hpp"

namespace legrag::judge {

void JudgeWeights::validate() const {
    const double sum = relevance_max + accuracy_max + completeness_max + fluency_max;
    if (sum != 100.0) {
        raise(Errc::invalid_config,
              "judge dimension maxima must sum to 100, got " + std::to_string(sum));
    }
}

std::string build_judge_prompt(const JudgeSample& sample, const PromptTemplate* tmpl) {
    if (sample.query.empty()) raise(Errc::missing_field, "judge sample missing query");
    if (sample.retrieved_docs.empty()) {
        raise(Errc::missing_field, "judge sample missing retrieved docs");
    }
    if (sample.generated_answer.empty()) {
        raise(Errc::missing_field, "judge sample missing generated answer");
    }
    if (sample.reference_answer.empty()) {
        raise(Errc::missing_field, "judge sample missing reference answer");
    }
    std::string docs;
    for (std::size_t i = 0; i < sample.retrieved_docs.size(); ++i) {
        docs += "[" + std::to_string(i + 1) + "] " + sample.retrieved_docs[i];
        if (i + 1 < sample.retrieved_docs.size()) docs += "\n";
    }
    const PromptTemplate& t = tmpl ? *tmpl : judge_template();
    return render_prompt(t, {{"query", sample.query},
                             {"reference_answer", sample.reference_answer},
                             {"generated_answer", sample.generated_answer},
                             {"retrieved_docs", docs}});
}

namespace {

double read_dimension(const nlohmann::json& j, const char* key, double max_value,
                      std::vector<std::string>& warnings) {
    if (!j.contains(key)) raise(Errc::missing_field, std::string("judge reply missing ") + key);
    const auto& v = j[key];
    if (!v.is_number()) {
        raise(Errc::non_numeric_score, std::string(key) + " is not numeric");
    }
    const double value = v.get<double>();
    if (!std::isfinite(value) || value < 0.0 || value > max_value) {
        raise(Errc::dimension_out_of_bounds,
              std::string(key) + "=" + std::to_string(value) + " outside [0, " +
                  std::to_string(max_value) + "]");
    }
    (void)warnings;
    return value;
}

} // namespace

JudgeScore parse_judge_reply(std::string_view reply, const JudgeWeights& weights) {
    weights.validate();
    auto parsed = find_first_json(reply);
    if (!parsed || !parsed->is_object()) {
        raise(Errc::no_json_found, "no JSON object in judge reply");
    }
    JudgeScore score;
    score.relevance = read_dimension(*parsed, "relevance_score", weights.relevance_max,
                                     score.warnings);
    score.accuracy = read_dimension(*parsed, "accuracy_score", weights.accuracy_max,
                                    score.warnings);
    score.completeness = read_dimension(*parsed, "completeness_score",
                                        weights.completeness_max, score.warnings);
    score.fluency = read_dimension(*parsed, "fluency_score", weights.fluency_max,
                                   score.warnings);
    score.total = score.relevance + score.accuracy + score.completeness + score.fluency;

    for (const char* total_key : {"total_score", "total"}) {
        if (parsed->contains(total_key) && (*parsed)[total_key].is_number()) {
            const double reported = (*parsed)[total_key].get<double>();
            if (reported != score.total) {
                score.warnings.push_back(
                    "model-reported total " + std::to_string(reported) +
                    " disagrees with dimension sum " + std::to_string(score.total) +
                    "; sum kept");
            }
            break;
        }
    }
    score.llm_score = score.total / 100.0;
    return score;
}

JudgeScore judge_one(ChatClient& client, const JudgeSample& sample,
                     const JudgeWeights& weights, const PromptTemplate* tmpl) {
    const auto& decoding = client.decoding();
    if (decoding.temperature != 0.0 || decoding.top_p != 1.0) {
        raise(Errc::invalid_config,
              "judge requires deterministic decoding (temperature 0, top_p 1.0); client '" +
                  client.client_id() + "' has temperature " +
                  std::to_string(decoding.temperature) + ", top_p " +
                  std::to_string(decoding.top_p));
    }
    const std::string prompt = build_judge_prompt(sample, tmpl);
    std::string suffix;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatRequest req;
        req.messages.push_back({"user", prompt + suffix});
        req.decoding = decoding;
        const std::string reply = client.complete(req);
        try {
            auto score = parse_judge_reply(reply, weights);
            if (attempt == 1) score.warnings.push_back("judge score parsed on retry");
            return score;
        } catch (const Error& e) {
            if (e.code() != Errc::no_json_found || attempt == 1) throw;
            suffix = "\nReply with the JSON object only.";
        }
    }
    raise(Errc::no_json_found, "unreachable");
}

JudgeBatchResult judge_batch(ChatClient& client, std::span<const JudgeSample> samples,
                             const JudgeWeights& weights, const PromptTemplate* tmpl,
                             std::size_t jobs) {
    JudgeBatchResult result;
    result.scores.resize(samples.size());
    std::vector<std::optional<std::string>> errors(samples.size());
    parallel_for(samples.size(), jobs, [&](std::size_t i) {
        try {
            result.scores[i] = judge_one(client, samples[i], weights, tmpl);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    double sum = 0.0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (result.scores[i]) {
            sum += result.scores[i]->llm_score;
            ++ok;
        } else {
            ++result.excluded;
            result.failures.push_back(samples[i].entry_id + ": " + errors[i].value_or("failed"));
        }
    }
    if (ok > 0) result.mean_llm_score = sum / static_cast<double>(ok);
    return result;
}

CredibilityReport credibility_check(std::span<const double> llm_scores,
                                    std::span<const double> human_scores) {
    CredibilityReport report;
    report.rho = metrics::spearman(llm_scores, human_scores);
    report.below_floor = report.rho < kCredibilityFloor;
    return report;
}

} // namespace legrag::judge
