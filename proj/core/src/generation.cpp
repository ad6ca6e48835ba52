#include "legrag/generation.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "legrag/errors.hpp"
#include "legrag/jsonx.hpp"
#include "legrag/text.hpp"

namespace legrag {

const char* generation_status_name(GenerationStatus s) noexcept {
    switch (s) {
        case GenerationStatus::VerifiedPass: return "verified_pass";
        case GenerationStatus::MaxRoundsExhausted: return "max_rounds_exhausted";
        case GenerationStatus::NoEvidence: return "no_evidence";
    }
    return "max_rounds_exhausted";
}

const char* reflection_action_name(ReflectionAction a) noexcept {
    switch (a) {
        case ReflectionAction::Accept: return "accept";
        case ReflectionAction::SupplementRetrieval: return "supplement_retrieval";
        case ReflectionAction::Regenerate: return "regenerate";
    }
    return "regenerate";
}

std::string format_reference_block(const std::vector<Segment>& topk_segments) {
    std::string block;
    for (std::size_t i = 0; i < topk_segments.size(); ++i) {
        const Segment& s = topk_segments[i];
        block += "[" + std::to_string(i + 1) + "] " + s.doc_id;
        if (s.article_label) block += " " + *s.article_label;
        block += "\n" + s.text;
        if (i + 1 < topk_segments.size()) block += "\n";
    }
    return block;
}

std::string build_answer_prompt(const std::string& query,
                                const std::vector<Segment>& topk_segments,
                                const PromptTemplate* tmpl) {
    if (topk_segments.empty()) {
        raise(Errc::empty_evidence, "cannot build an answer prompt without evidence");
    }
    const PromptTemplate& t = tmpl ? *tmpl : answer_generation_template();
    return render_prompt(t, {{"reference", format_reference_block(topk_segments)},
                             {"query", query}});
}

namespace {

constexpr const char* kRelatedMarker = "[related documents]";
constexpr const char* kAnswerMarker = "[answer]";

constexpr const char* kCorrectiveNote =
    "\nThe previous answer failed verification: it was not fully grounded in the "
    "[retrieval results] or drew conclusions inconsistent with them. Regenerate the "
    "[related documents] and [answer], using only the [retrieval results].";

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (std::isspace(static_cast<unsigned char>(s[b])) != 0)) ++b;
    while (e > b && (std::isspace(static_cast<unsigned char>(s[e - 1])) != 0)) --e;
    return std::string(s.substr(b, e - b));
}

/// [i] markers in the related-documents section, resolved to segment ids.
std::vector<std::string> resolve_markers(std::string_view section,
                                         const std::vector<Segment>& topk) {
    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < section.size(); ++i) {
        if (section[i] != '[') continue;
        std::size_t j = i + 1;
        std::string digits;
        while (j < section.size() && std::isdigit(static_cast<unsigned char>(section[j]))) {
            digits.push_back(section[j]);
            ++j;
        }
        if (j < section.size() && section[j] == ']' && !digits.empty() && digits.size() <= 4) {
            const std::size_t n = static_cast<std::size_t>(std::stoul(digits));
            if (n >= 1 && n <= topk.size()) {
                const std::string& id = topk[n - 1].segment_id;
                if (seen.insert(id).second) ids.push_back(id);
            }
            i = j;
        }
    }
    return ids;
}

} // namespace

InitialAnswer generate_initial(ChatClient& client, const std::string& query,
                               const std::vector<Segment>& topk_segments,
                               const PromptTemplate* tmpl,
                               const std::string& corrective_note) {
    InitialAnswer out;
    std::string prompt = build_answer_prompt(query, topk_segments, tmpl);
    if (!corrective_note.empty()) prompt += corrective_note;

    ChatRequest req;
    req.messages.push_back({"user", std::move(prompt)});
    req.decoding = client.decoding();
    const std::string reply = client.complete(req);
    if (text::is_blank(reply)) {
        raise(Errc::empty_completion, "model returned an empty completion");
    }

    const std::size_t related_pos = reply.find(kRelatedMarker);
    const std::size_t answer_pos =
        reply.find(kAnswerMarker, related_pos == std::string::npos ? 0 : related_pos);
    if (related_pos == std::string::npos || answer_pos == std::string::npos ||
        answer_pos < related_pos) {
        out.answer = trim(reply);
        out.warnings.push_back("reply has no [related documents]/[answer] markers; "
                               "treated whole output as answer");
        return out;
    }

    const std::size_t related_start = related_pos + std::char_traits<char>::length(kRelatedMarker);
    const std::string_view related_section =
        std::string_view(reply).substr(related_start, answer_pos - related_start);
    out.related_docs = resolve_markers(related_section, topk_segments);
    out.answer = trim(std::string_view(reply).substr(
        answer_pos + std::char_traits<char>::length(kAnswerMarker)));
    return out;
}

ReflectionRound self_reflect(ChatClient& client, const std::string& query,
                             const std::string& answer,
                             const std::vector<Segment>& topk_segments,
                             const PromptTemplate* tmpl) {
    const PromptTemplate& t = tmpl ? *tmpl : reflection_template();
    const std::string prompt =
        render_prompt(t, {{"reference", format_reference_block(topk_segments)},
                          {"query", query},
                          {"answer", answer}});

    ReflectionRound round;
    std::string reply;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatRequest req;
        req.messages.push_back({"user", attempt == 0
                                            ? prompt
                                            : prompt + "\nReply with the JSON object only."});
        req.decoding = client.decoding();
        reply = client.complete(req);
        auto parsed = find_first_json(reply);
        if (parsed && parsed->is_object() && parsed->contains("grounding") &&
            parsed->contains("consistency") && parsed->contains("completeness") &&
            (*parsed)["grounding"].is_boolean() && (*parsed)["consistency"].is_boolean() &&
            (*parsed)["completeness"].is_boolean()) {
            round.check_grounding = (*parsed)["grounding"].get<bool>();
            round.check_consistency = (*parsed)["consistency"].get<bool>();
            round.check_completeness = (*parsed)["completeness"].get<bool>();
            if (parsed->contains("missing_points") && (*parsed)["missing_points"].is_string()) {
                round.missing_points = (*parsed)["missing_points"].get<std::string>();
            }
            if (attempt == 1) round.warnings.push_back("verdict parsed on retry");
            round.action_taken =
                (round.check_grounding && round.check_consistency && round.check_completeness)
                    ? ReflectionAction::Accept
                : (!round.check_grounding || !round.check_consistency)
                    ? ReflectionAction::Regenerate
                    : ReflectionAction::SupplementRetrieval;
            return round;
        }
    }
    round.check_grounding = false;
    round.check_consistency = false;
    round.check_completeness = false;
    round.action_taken = ReflectionAction::Regenerate;
    round.warnings.push_back("unparseable verification verdict after retry; treated as all-fail");
    return round;
}

namespace {

std::vector<Segment> resolve_topk(const HybridIndex& index,
                                  const std::vector<ScoredSegment>& topk) {
    std::vector<Segment> out;
    out.reserve(topk.size());
    for (const auto& s : topk) {
        if (const Segment* seg = index.find_segment(s.segment_id)) out.push_back(*seg);
    }
    return out;
}

} // namespace

GenerationResult answer_for_run(const PipelineClients& clients, const HybridIndex& index,
                                RetrievalRun& run, const RetrievalConfig& retrieval_cfg,
                                const GenerationConfig& generation_cfg) {
    if (clients.chat == nullptr) {
        raise(Errc::invalid_config, "generation requires a chat client");
    }
    if (generation_cfg.max_reflection_rounds < 0) {
        raise(Errc::invalid_config, "max_reflection_rounds must be >= 0");
    }

    GenerationResult result;
    if (run.topk.empty()) {
        result.status = GenerationStatus::NoEvidence;
        return result;
    }

    std::vector<Segment> evidence = resolve_topk(index, run.topk);
    const std::string& query = run.query.original;

    InitialAnswer initial = generate_initial(*clients.chat, query, evidence,
                                             generation_cfg.answer_template);
    result.related_docs = initial.related_docs;
    result.answer = initial.answer;
    result.initial_answer = initial.answer;
    result.warnings = initial.warnings;
    result.status = GenerationStatus::MaxRoundsExhausted;

    for (int r = 0; r < generation_cfg.max_reflection_rounds; ++r) {
        ReflectionRound round;
        try {
            round = self_reflect(*clients.chat, query, result.answer, evidence,
                                 generation_cfg.reflection_template);
        } catch (const std::exception& e) {
            result.warnings.push_back(std::string("reflection round failed (") + e.what() +
                                      "); keeping best-effort answer");
            break;
        }
        result.reflection_rounds.push_back(round);
        if (round.action_taken == ReflectionAction::Accept) {
            result.status = GenerationStatus::VerifiedPass;
            break;
        }
        try {
            std::string corrective;
            if (round.action_taken == ReflectionAction::SupplementRetrieval) {
                std::string rerank_query = query;
                if (!round.missing_points.empty()) {
                    rerank_query += "\n" + round.missing_points;
                }
                run.topk = rerank(index, clients.retrieval.reranker, rerank_query, run.stage1,
                                  retrieval_cfg.top_k, retrieval_cfg.rerank_fallback_passthrough,
                                  &result.warnings);
                evidence = resolve_topk(index, run.topk);
                if (evidence.empty()) {
                    result.status = GenerationStatus::NoEvidence;
                    break;
                }
            } else {
                corrective = kCorrectiveNote;
            }
            InitialAnswer regenerated =
                generate_initial(*clients.chat, query, evidence,
                                 generation_cfg.answer_template, corrective);
            result.related_docs = regenerated.related_docs;
            result.answer = regenerated.answer;
            for (auto& w : regenerated.warnings) result.warnings.push_back(std::move(w));
        } catch (const std::exception& e) {
            result.warnings.push_back(std::string("post-reflection step failed (") + e.what() +
                                      "); keeping best-effort answer");
            break;
        }
    }
    return result;
}

GenerationResult answer_with_reflection(const PipelineClients& clients,
                                        const HybridIndex& index, const std::string& query,
                                        const RetrievalConfig& retrieval_cfg,
                                        const GenerationConfig& generation_cfg,
                                        RetrievalRun* run_out) {
    RetrievalRun local_run = retrieve(index, query, retrieval_cfg, clients.retrieval);
    GenerationResult result =
        answer_for_run(clients, index, local_run, retrieval_cfg, generation_cfg);
    if (run_out) *run_out = std::move(local_run);
    return result;
}

} // namespace legrag
