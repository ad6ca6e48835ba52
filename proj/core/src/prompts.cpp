#include "legrag/prompts.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "legrag/errors.hpp"
#include "legrag/hashing.hpp"

namespace legrag {

namespace {

const char* kAnswerGeneration =
    R"(You are a legal Q&A consulting expert. First, you need to select the documents related to the [question]
from the [retrieval results] and output [related documents], and then complete the [answer] according to the
[related documents].
[retrieval results]
-{reference}
[question]
{query}
[related documents]
Output the relevant documents from the [retrieval results] according to query
[answer]
Output the answer to query according to the [related documents]
)";

const char* kJudge =
    R"(You are a professional evaluation expert for legal Retrieval-Augmented Generation (RAG) systems. You need to assess the quality of the generated answer according to the given legal question, gold reference answer and retrieved legal documents.

Evaluation Criteria (Total: 100 points)
1. Relevance (30 points): Evaluate if the generated answer is supported by retrieved legal documents and relevant to the raised question.
2. Accuracy (40 points): Evaluate the correctness of legal conclusions, statutory clauses and factual statements in the answer.
3. Completeness (20 points): Evaluate if the answer fully covers all key legal points of the question.
4. Fluency (10 points): Evaluate the linguistic smoothness and logical coherence of the answer.

Input Information
Question: {query}
Gold Reference Answer: {reference_answer}
Model-generated Answer: {generated_answer}
Retrieved Legal Documents: {retrieved_docs}

Return a single JSON object with exactly these keys:
{"relevance_score": <0-30>, "accuracy_score": <0-40>, "completeness_score": <0-20>, "fluency_score": <0-10>}
)";

const char* kReflection =
    R"(You are a strict legal answer verifier. Check the [answer] to the [question] against the [retrieval results] on three dimensions:
1. grounding: the answer is fully based on the [retrieval results], with no external knowledge.
2. consistency: every legal conclusion in the answer is consistent with the provisions in the [retrieval results].
3. completeness: no key information from the [retrieval results] that the question asks about is omitted.

[retrieval results]
{reference}
[question]
{query}
[answer]
{answer}

Return a single JSON object with exactly these keys:
{"grounding": true|false, "consistency": true|false, "completeness": true|false, "missing_points": "<short summary of omitted points, empty string if none>"}
)";

const char* kEntityExtraction =
    R"(Extract the legal entities and terms of art from the question below: statute names, regulated objects, legal obligations and defined concepts. Return a single JSON array of strings, most specific terms first. Return [] if there are none.

Question: {query}
)";

PromptTemplate make(const char* name, const char* text) {
    PromptTemplate t;
    t.name = name;
    t.text = text;
    t.sha256 = hashing::sha256_hex(t.text);
    return t;
}

} // namespace

const PromptTemplate& answer_generation_template() {
    static const PromptTemplate t = make("answer_generation", kAnswerGeneration);
    return t;
}

const PromptTemplate& judge_template() {
    static const PromptTemplate t = make("judge", kJudge);
    return t;
}

const PromptTemplate& reflection_template() {
    static const PromptTemplate t = make("reflection", kReflection);
    return t;
}

const PromptTemplate& entity_extraction_template() {
    static const PromptTemplate t = make("entity_extraction", kEntityExtraction);
    return t;
}

std::string render_prompt(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string>& slots) {
    std::string out = tmpl.text;
    for (const auto& [name, value] : slots) {
        const std::string needle = "{" + name + "}";
        std::size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return out;
}

namespace {

PromptTemplate load_or_builtin(const std::optional<std::string>& dir,
                               const PromptTemplate& builtin,
                               std::vector<std::string>& warnings) {
    if (!dir) return builtin;
    const auto path = std::filesystem::path(*dir) / (builtin.name + ".txt");
    std::ifstream in(path);
    if (!in) return builtin;
    std::stringstream ss;
    ss << in.rdbuf();
    PromptTemplate t;
    t.name = builtin.name;
    t.text = ss.str();
    t.sha256 = hashing::sha256_hex(t.text);
    if (t.sha256 != builtin.sha256) {
        warnings.push_back("template '" + builtin.name + "' differs from the pinned hash (" +
                           t.sha256.substr(0, 12) + " != " + builtin.sha256.substr(0, 12) + ")");
    }
    return t;
}

} // namespace

TemplateSet load_templates(const std::optional<std::string>& dir) {
    TemplateSet set;
    set.answer = load_or_builtin(dir, answer_generation_template(), set.warnings);
    set.judge = load_or_builtin(dir, judge_template(), set.warnings);
    set.reflection = load_or_builtin(dir, reflection_template(), set.warnings);
    set.entity = load_or_builtin(dir, entity_extraction_template(), set.warnings);
    return set;
}

} // namespace legrag
