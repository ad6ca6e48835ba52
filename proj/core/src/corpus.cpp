#include "legrag/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "legrag/errors.hpp"

namespace legrag {

using nlohmann::json;

const char* question_type_name(QuestionType t) noexcept {
    switch (t) {
        case QuestionType::ConceptExplanation: return "concept";
        case QuestionType::SummaryInduction: return "summary";
        case QuestionType::LogicalReasoning: return "logic";
        case QuestionType::Other: return "other";
    }
    return "other";
}

std::optional<QuestionType> question_type_from_name(std::string_view name) noexcept {
    if (name == "concept") return QuestionType::ConceptExplanation;
    if (name == "summary") return QuestionType::SummaryInduction;
    if (name == "logic") return QuestionType::LogicalReasoning;
    if (name == "other") return QuestionType::Other;
    return std::nullopt;
}

namespace {

json parse_line(const std::string& line, const std::string& origin, std::size_t lineno) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        raise(Errc::malformed_record,
              origin + ":" + std::to_string(lineno) + ": not a JSON object");
    }
    return j;
}

std::string require_string(const json& j, const char* key, const std::string& origin,
                           std::size_t lineno) {
    if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty()) {
        raise(Errc::malformed_record, origin + ":" + std::to_string(lineno) +
                                          ": missing or empty field \"" + key + "\"");
    }
    return j[key].get<std::string>();
}

} // namespace

std::vector<LegalDocument> load_corpus(std::istream& in, const std::string& origin) {
    std::vector<LegalDocument> docs;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_line(line, origin, lineno);
        LegalDocument doc;
        doc.doc_id = require_string(j, "doc_id", origin, lineno);
        doc.title = j.value("title", std::string{});
        doc.body = require_string(j, "body", origin, lineno);
        if (j.contains("domain_tag") && j["domain_tag"].is_string()) {
            doc.domain_tag = j["domain_tag"].get<std::string>();
        }
        if (!seen.insert(doc.doc_id).second) {
            raise(Errc::duplicate_doc_id, origin + ":" + std::to_string(lineno) +
                                              ": duplicate doc_id \"" + doc.doc_id + "\"");
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::vector<LegalDocument> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open corpus file: " + path);
    return load_corpus(in, path);
}

std::vector<QAEntry> load_qa_dataset(std::istream& in, const std::string& origin,
                                     const std::vector<LegalDocument>* corpus) {
    std::unordered_set<std::string> known_docs;
    if (corpus) {
        for (const auto& d : *corpus) known_docs.insert(d.doc_id);
    }

    std::vector<QAEntry> entries;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_line(line, origin, lineno);
        const std::string at = origin + ":" + std::to_string(lineno);

        QAEntry e;
        e.entry_id = require_string(j, "entry_id", origin, lineno);
        e.doc_id = require_string(j, "doc_id", origin, lineno);
        e.question = require_string(j, "question", origin, lineno);
        e.gold_answer = require_string(j, "answer", origin, lineno);

        const std::string type_name = require_string(j, "question_type", origin, lineno);
        auto qt = question_type_from_name(type_name);
        if (!qt) raise(Errc::unknown_question_type, at + ": \"" + type_name + "\"");
        e.question_type = *qt;

        if (!j.contains("references") || !j["references"].is_array() ||
            j["references"].empty()) {
            raise(Errc::malformed_record, at + ": missing or empty \"references\"");
        }
        for (const auto& r : j["references"]) {
            if (!r.is_object()) raise(Errc::malformed_record, at + ": reference not an object");
            ReferenceSpan span;
            span.doc_id = r.value("doc_id", e.doc_id);
            if (span.doc_id.empty()) {
                raise(Errc::malformed_record, at + ": reference with empty doc_id");
            }
            if (r.contains("article_label") && r["article_label"].is_string()) {
                auto canon = text::normalize_article_label(r["article_label"].get<std::string>());
                if (!canon) {
                    raise(Errc::malformed_record,
                          at + ": unrecognizable article_label \"" +
                              r["article_label"].get<std::string>() + "\"");
                }
                span.article_label = *canon;
            }
            if (r.contains("key_text") && r["key_text"].is_string() &&
                !r["key_text"].get<std::string>().empty()) {
                span.key_text = r["key_text"].get<std::string>();
            }
            if (!span.article_label && !span.key_text) {
                raise(Errc::malformed_record,
                      at + ": reference needs article_label or key_text");
            }
            if (corpus && !known_docs.count(span.doc_id)) {
                raise(Errc::dangling_doc_reference,
                      at + ": reference to unknown doc \"" + span.doc_id + "\"");
            }
            e.references.push_back(std::move(span));
        }
        if (corpus && !known_docs.count(e.doc_id)) {
            raise(Errc::dangling_doc_reference, at + ": unknown doc \"" + e.doc_id + "\"");
        }
        if (!seen.insert(e.entry_id).second) {
            raise(Errc::malformed_record, at + ": duplicate entry_id \"" + e.entry_id + "\"");
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<QAEntry> load_qa_dataset(const std::string& path,
                                     const std::vector<LegalDocument>* corpus) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open QA file: " + path);
    return load_qa_dataset(in, path, corpus);
}

void save_corpus(const std::vector<LegalDocument>& docs, std::ostream& out) {
    for (const auto& d : docs) {
        json j{{"doc_id", d.doc_id}, {"title", d.title}, {"body", d.body}};
        if (d.domain_tag) j["domain_tag"] = *d.domain_tag;
        out << j.dump() << '\n';
    }
}

void save_qa_dataset(const std::vector<QAEntry>& entries, std::ostream& out) {
    for (const auto& e : entries) {
        json refs = json::array();
        for (const auto& r : e.references) {
            json jr{{"doc_id", r.doc_id}};
            if (r.article_label) jr["article_label"] = *r.article_label;
            if (r.key_text) jr["key_text"] = *r.key_text;
            refs.push_back(std::move(jr));
        }
        json j{{"entry_id", e.entry_id},
               {"doc_id", e.doc_id},
               {"question", e.question},
               {"answer", e.gold_answer},
               {"question_type", question_type_name(e.question_type)},
               {"references", std::move(refs)}};
        out << j.dump() << '\n';
    }
}

namespace {

TokenLengthStats length_stats(const std::vector<std::size_t>& lengths) {
    TokenLengthStats s;
    if (lengths.empty()) return s;
    s.min = std::numeric_limits<std::size_t>::max();
    double sum = 0.0;
    for (std::size_t n : lengths) {
        s.min = std::min(s.min, n);
        s.max = std::max(s.max, n);
        sum += static_cast<double>(n);
    }
    s.mean = sum / static_cast<double>(lengths.size());
    return s;
}

} // namespace

DatasetStats dataset_stats(const std::vector<QAEntry>& entries,
                           const text::TokenCounter& counter) {
    if (entries.empty()) raise(Errc::empty_dataset, "dataset_stats over zero entries");

    DatasetStats stats;
    stats.entry_count = entries.size();

    static constexpr QuestionType kTypes[] = {
        QuestionType::ConceptExplanation, QuestionType::SummaryInduction,
        QuestionType::LogicalReasoning, QuestionType::Other};
    std::vector<std::size_t> counts(4, 0);
    std::vector<std::size_t> q_len, a_len, r_len;
    q_len.reserve(entries.size());
    a_len.reserve(entries.size());
    r_len.reserve(entries.size());
    for (const auto& e : entries) {
        counts[static_cast<std::size_t>(e.question_type)]++;
        q_len.push_back(counter(e.question));
        a_len.push_back(counter(e.gold_answer));
        std::string ref_text;
        for (const auto& r : e.references) {
            if (r.key_text) ref_text += *r.key_text;
            else if (r.article_label) ref_text += *r.article_label;
        }
        r_len.push_back(counter(ref_text));
    }
    for (std::size_t i = 0; i < 4; ++i) {
        stats.type_counts.emplace_back(kTypes[i], counts[i]);
        stats.type_fractions.emplace_back(
            kTypes[i], static_cast<double>(counts[i]) / static_cast<double>(entries.size()));
    }
    stats.question = length_stats(q_len);
    stats.answer = length_stats(a_len);
    stats.reference = length_stats(r_len);
    return stats;
}

} // namespace legrag
