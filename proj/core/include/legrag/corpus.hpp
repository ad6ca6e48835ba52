#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "legrag/text.hpp"

namespace legrag {

/// One statute or regulation.
struct LegalDocument {
    std::string doc_id;
    std::string title;
    std::string body;
    std::optional<std::string> domain_tag;
};

enum class QuestionType { ConceptExplanation, SummaryInduction, LogicalReasoning, Other };

/// Wire names: "concept", "summary", "logic", "other".
const char* question_type_name(QuestionType t) noexcept;
std::optional<QuestionType> question_type_from_name(std::string_view name) noexcept;

struct ReferenceSpan {
    std::string doc_id;
    std::optional<std::string> article_label; // canonical "Article N" form
    std::optional<std::string> key_text;
};

/// The five-tuple benchmark record.
struct QAEntry {
    std::string entry_id;
    std::string doc_id;
    std::string question;
    std::string gold_answer;
    QuestionType question_type = QuestionType::Other;
    std::vector<ReferenceSpan> references;
};

struct TokenLengthStats {
    std::size_t min = 0;
    std::size_t max = 0;
    double mean = 0.0;
};

struct DatasetStats {
    std::size_t entry_count = 0;
    std::vector<std::pair<QuestionType, std::size_t>> type_counts;
    std::vector<std::pair<QuestionType, double>> type_fractions;
    TokenLengthStats question;
    TokenLengthStats answer;
    TokenLengthStats reference; // over concatenated reference key texts / labels
};

/// Loads a JSON-lines corpus file: {"doc_id","title","body","domain_tag"?}.
/// Throws Error{malformed_record} with the line number, or duplicate_doc_id.
std::vector<LegalDocument> load_corpus(const std::string& path);
std::vector<LegalDocument> load_corpus(std::istream& in, const std::string& origin);

/// Loads a JSON-lines QA file; validates the five-tuple schema and, when a
/// corpus is given, that every referenced doc_id resolves.
std::vector<QAEntry> load_qa_dataset(const std::string& path,
                                     const std::vector<LegalDocument>* corpus = nullptr);
std::vector<QAEntry> load_qa_dataset(std::istream& in, const std::string& origin,
                                     const std::vector<LegalDocument>* corpus = nullptr);

void save_corpus(const std::vector<LegalDocument>& docs, std::ostream& out);
void save_qa_dataset(const std::vector<QAEntry>& entries, std::ostream& out);

DatasetStats dataset_stats(const std::vector<QAEntry>& entries,
                           const text::TokenCounter& counter = text::count_tokens);

} // namespace legrag
