#pragma once

#include <optional>
#include <string>
#include <vector>

#include "legrag/clients.hpp"
#include "legrag/prompts.hpp"
#include "legrag/retrieval.hpp"

namespace legrag {

enum class GenerationStatus { VerifiedPass, MaxRoundsExhausted, NoEvidence };

const char* generation_status_name(GenerationStatus s) noexcept;

enum class ReflectionAction { Accept, SupplementRetrieval, Regenerate };

const char* reflection_action_name(ReflectionAction a) noexcept;

/// One verification pass: the three checks and the routing decision.
/// Accept if and only if all three checks pass.
struct ReflectionRound {
    bool check_grounding = false;
    bool check_consistency = false;
    bool check_completeness = false;
    ReflectionAction action_taken = ReflectionAction::Regenerate;
    std::string missing_points; // verifier's summary, drives supplementary retrieval
    std::vector<std::string> warnings;
};

struct GenerationResult {
    std::vector<std::string> related_docs; // segment ids the model selected
    std::string answer;
    std::string initial_answer;
    std::vector<ReflectionRound> reflection_rounds;
    GenerationStatus status = GenerationStatus::MaxRoundsExhausted;
    std::vector<std::string> warnings;
};

struct GenerationConfig {
    int max_reflection_rounds = 2;
    const PromptTemplate* answer_template = nullptr;     // defaults to built-in
    const PromptTemplate* reflection_template = nullptr; // defaults to built-in
};

/// Numbered evidence block: "[i] doc_id article_label?\ntext" per segment.
std::string format_reference_block(const std::vector<Segment>& topk_segments);

/// Answer-generation prompt with {reference} and {query} substituted.
/// Throws Error{empty_evidence} when topk_segments is empty.
std::string build_answer_prompt(const std::string& query,
                                const std::vector<Segment>& topk_segments,
                                const PromptTemplate* tmpl = nullptr);

struct InitialAnswer {
    std::vector<std::string> related_docs;
    std::string answer;
    std::vector<std::string> warnings;
};

/// One model call, parsed into the two prompt-mandated sections. Replies
/// without recognizable section markers become the whole answer with a
/// parse warning and no selected documents.
InitialAnswer generate_initial(ChatClient& client, const std::string& query,
                               const std::vector<Segment>& topk_segments,
                               const PromptTemplate* tmpl = nullptr,
                               const std::string& corrective_note = {});

/// One verification call. An unparseable verdict is retried once, then
/// treated as all-fail with a warning.
ReflectionRound self_reflect(ChatClient& client, const std::string& query,
                             const std::string& answer,
                             const std::vector<Segment>& topk_segments,
                             const PromptTemplate* tmpl = nullptr);

struct PipelineClients {
    ChatClient* chat = nullptr; // generation and reflection
    RetrievalProviders retrieval;
};

/// The full pipeline: retrieve, generate, then verify up to
/// max_reflection_rounds times. Completeness failures re-rank the stage-1
/// candidates with the verifier's missing points appended to the rerank
/// query; grounding/consistency failures regenerate with a corrective
/// instruction. `run`, when given, receives the retrieval trace (its topk
/// reflects any supplementary rerank).
GenerationResult answer_with_reflection(const PipelineClients& clients,
                                        const HybridIndex& index, const std::string& query,
                                        const RetrievalConfig& retrieval_cfg,
                                        const GenerationConfig& generation_cfg,
                                        RetrievalRun* run = nullptr);

/// Same pipeline over a precomputed retrieval run (mutates run.topk when a
/// supplementary rerank fires).
GenerationResult answer_for_run(const PipelineClients& clients, const HybridIndex& index,
                                RetrievalRun& run, const RetrievalConfig& retrieval_cfg,
                                const GenerationConfig& generation_cfg);

} // namespace legrag
