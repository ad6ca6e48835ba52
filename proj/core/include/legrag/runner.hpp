#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "legrag/clients.hpp"
#include "legrag/corpus.hpp"
#include "legrag/generation.hpp"
#include "legrag/index.hpp"
#include "legrag/metrics.hpp"
#include "legrag/prompts.hpp"
#include "legrag/providers.hpp"
#include "legrag/retrieval.hpp"
#include "legrag/splitter.hpp"

namespace legrag {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Published reference results shown next to live-run retrieval numbers.
inline constexpr double kReferenceRecallPercent = 78.02;
inline constexpr double kReferenceMrr5Percent = 50.23;

struct ProviderSpec {
    std::string kind;            // deterministic | remote | mock | identity | none
    std::size_t dimension = 256; // embedding kinds
    RemoteEndpoint endpoint;     // remote kinds; api_key resolved from the environment
    std::string api_key_env;

    nlohmann::json to_json() const;
    static ProviderSpec from_json(const nlohmann::json& j, std::string default_kind,
                                  std::string default_env);
};

struct ReflectionSettings {
    bool enabled = true;
    int max_rounds = 2;

    int effective_rounds() const { return enabled ? max_rounds : 0; }
};

/// One declarative run configuration: file paths, pipeline knobs and
/// provider wiring. Secrets never appear here; only env var names do.
struct RunConfig {
    std::string corpus_path;
    std::string dataset_path;
    std::string output_dir = "out";
    std::string index_path; // defaults to "<output_dir>/index.lgdx"

    SplitStrategy strategy = SplitStrategy::ChunkPlusArticle;
    SplitConfig split;
    RetrievalConfig retrieval;
    ReflectionSettings reflection;
    DecodingParams chat_decoding;

    std::optional<std::string> lexicon_path;
    std::optional<std::string> template_dir;
    double accuracy_threshold = 0.5;
    bool threshold_calibrated = false; // true once a calibration overlay is loaded
    metrics::GoldMatchRule gold_match;

    ProviderSpec embedding{.kind = "deterministic"};
    ProviderSpec chat{.kind = "mock"};
    ProviderSpec rerank{.kind = "identity"};
    ProviderSpec judge{.kind = "none"};
    ProviderSpec extractor{.kind = "none"};

    std::size_t jobs = 1;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    std::string digest() const; // SHA-256 of the canonical JSON form
    std::string effective_index_path() const;
    void validate_paths_for(bool needs_corpus, bool needs_dataset, bool needs_index) const;
};

/// Owning bundle of the providers a run needs.
struct BuiltProviders {
    std::unique_ptr<EmbeddingProvider> embedding;
    std::unique_ptr<ChatClient> chat;
    std::unique_ptr<Reranker> reranker; // null means passthrough
    std::unique_ptr<ChatClient> judge;
    std::unique_ptr<ChatClient> extractor;
};

BuiltProviders build_providers(const RunConfig& cfg);

/// Loads a one-term-per-line lexicon file (blank lines and '#' comments skipped).
std::vector<std::string> load_lexicon(const std::string& path);

/// Commands write output_dir/<run_id>/ with manifest.json first, then
/// traces/answers/report files. Reports carry no wall-clock data, so two
/// runs of an identical config with deterministic providers are
/// byte-identical.
class Runner {
public:
    explicit Runner(RunConfig cfg);

    /// Allows tests to substitute scripted providers.
    Runner(RunConfig cfg, BuiltProviders providers);

    nlohmann::json cmd_index();
    nlohmann::json cmd_eval_retrieval();
    nlohmann::json cmd_eval_generation();
    nlohmann::json cmd_judge(const std::optional<std::string>& answers_run_dir,
                             const std::optional<std::string>& human_scores_csv);
    nlohmann::json cmd_calibrate(const std::string& labeled_scores_path);
    nlohmann::json cmd_ask(const std::string& question, bool no_reflection, bool verbose);
    nlohmann::json cmd_sweep();

    const std::filesystem::path& last_run_dir() const { return last_run_dir_; }

private:
    struct LoadedData;

    RunConfig cfg_;
    BuiltProviders providers_;
    TemplateSet templates_;
    std::filesystem::path last_run_dir_;

    std::filesystem::path prepare_run_dir(const std::string& command);
    void write_manifest(const std::filesystem::path& run_dir, const std::string& command,
                        const nlohmann::json& extra, const std::vector<std::string>& warnings);
    void finish_report(const std::filesystem::path& run_dir, const nlohmann::json& report,
                       const std::string& rendered_text);
};

/// Renders a stored report.json as the human-readable table. Several
/// reports render as side-by-side comparison rows.
std::string render_report_text(const nlohmann::json& report);
std::string render_comparison_text(const std::vector<nlohmann::json>& reports);

/// Atomic file write (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace legrag
