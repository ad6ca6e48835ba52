#include "legrag/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "legrag/concurrency.hpp"
#include "legrag/errors.hpp"
#include "legrag/hashing.hpp"
#include "legrag/judge.hpp"
#include "legrag/serde.hpp"
#include "legrag/text.hpp"

namespace legrag {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// config
// ---------------------------------------------------------------------------

json ProviderSpec::to_json() const {
    json j{{"kind", kind}};
    if (kind == "deterministic" || kind == "remote") j["dimension"] = dimension;
    if (kind == "remote") {
        j["base_url"] = endpoint.base_url;
        j["path"] = endpoint.path;
        j["model"] = endpoint.model;
        j["api_key_env"] = api_key_env;
        j["timeout_seconds"] = endpoint.timeout_seconds;
        j["max_attempts"] = endpoint.max_attempts;
        j["min_interval_ms"] = endpoint.min_interval.count();
    }
    return j;
}

ProviderSpec ProviderSpec::from_json(const json& j, std::string default_kind,
                                     std::string default_env) {
    ProviderSpec spec;
    spec.kind = default_kind;
    spec.api_key_env = std::move(default_env);
    if (j.is_null()) return spec;
    spec.kind = j.value("kind", default_kind);
    spec.dimension = j.value("dimension", std::size_t{256});
    if (spec.kind == "remote") {
        spec.endpoint.base_url = j.value("base_url", std::string{});
        spec.endpoint.path = j.value("path", std::string{});
        spec.endpoint.model = j.value("model", std::string{});
        spec.api_key_env = j.value("api_key_env", spec.api_key_env);
        spec.endpoint.timeout_seconds = j.value("timeout_seconds", 60);
        spec.endpoint.max_attempts = j.value("max_attempts", 3);
        spec.endpoint.min_interval =
            std::chrono::milliseconds(j.value("min_interval_ms", std::int64_t{0}));
        if (spec.endpoint.base_url.empty() || spec.endpoint.path.empty()) {
            raise(Errc::invalid_config, "remote provider needs base_url and path");
        }
    }
    return spec;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open config file: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) raise(Errc::invalid_config, "config is not valid JSON: " + path);
    return from_json(j);
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig cfg;
    cfg.corpus_path = j.value("corpus", std::string{});
    cfg.dataset_path = j.value("dataset", std::string{});
    cfg.output_dir = j.value("output_dir", std::string{"out"});
    cfg.index_path = j.value("index_path", std::string{});

    if (auto s = split_strategy_from_name(j.value("strategy", "chunk+article"))) {
        cfg.strategy = *s;
    } else {
        raise(Errc::invalid_config, "unknown strategy '" + j.value("strategy", "") + "'");
    }
    if (j.contains("split")) {
        const auto& s = j["split"];
        cfg.split.chunk_size = s.value("chunk_size", std::size_t{512});
        cfg.split.chunk_overlap = s.value("chunk_overlap", std::size_t{64});
        cfg.split.min_chunk = s.value("min_chunk", std::size_t{32});
    }
    cfg.split.validate();
    if (j.contains("retrieval")) {
        const auto& r = j["retrieval"];
        cfg.retrieval.stage1_n = r.value("stage1_n", std::size_t{20});
        cfg.retrieval.top_k = r.value("top_k", std::size_t{5});
        cfg.retrieval.rrf_k0 = r.value("rrf_k0", 60);
        cfg.retrieval.entity_augmentation = r.value("entity_augmentation", true);
        cfg.retrieval.rerank_fallback_passthrough = r.value("rerank_fallback", true);
    }
    cfg.retrieval.validate();
    if (j.contains("reflection")) {
        const auto& r = j["reflection"];
        cfg.reflection.enabled = r.value("enabled", true);
        cfg.reflection.max_rounds = r.value("max_rounds", 2);
        if (cfg.reflection.max_rounds < 0) {
            raise(Errc::invalid_config, "reflection.max_rounds must be >= 0");
        }
    }
    if (j.contains("decoding")) {
        const auto& d = j["decoding"];
        cfg.chat_decoding.temperature = d.value("temperature", 0.0);
        cfg.chat_decoding.top_p = d.value("top_p", 1.0);
        cfg.chat_decoding.max_tokens = d.value("max_tokens", 2048);
    }
    if (j.contains("lexicon") && j["lexicon"].is_string()) {
        cfg.lexicon_path = j["lexicon"].get<std::string>();
    }
    if (j.contains("template_dir") && j["template_dir"].is_string()) {
        cfg.template_dir = j["template_dir"].get<std::string>();
    }
    cfg.accuracy_threshold = j.value("accuracy_threshold", 0.5);
    if (j.contains("gold_match")) {
        const auto& g = j["gold_match"];
        const std::string mode = g.value("mode", "article_label");
        if (mode == "article_label") {
            cfg.gold_match.mode = metrics::GoldMatchMode::ArticleLabel;
        } else if (mode == "key_text") {
            cfg.gold_match.mode = metrics::GoldMatchMode::KeyTextOverlap;
        } else {
            raise(Errc::invalid_config, "unknown gold_match.mode '" + mode + "'");
        }
        cfg.gold_match.key_text_threshold = g.value("key_text_threshold", 0.8);
        cfg.gold_match.span_coverage_threshold = g.value("span_coverage", 0.8);
    }

    const json providers = j.value("providers", json::object());
    cfg.embedding = ProviderSpec::from_json(providers.value("embedding", json{}),
                                            "deterministic", "EMBED_API_KEY");
    cfg.chat = ProviderSpec::from_json(providers.value("chat", json{}), "mock",
                                       "CHAT_API_KEY");
    cfg.rerank = ProviderSpec::from_json(providers.value("rerank", json{}), "identity",
                                         "RERANK_API_KEY");
    cfg.judge = ProviderSpec::from_json(providers.value("judge", json{}), "none",
                                        "JUDGE_API_KEY");
    cfg.extractor = ProviderSpec::from_json(providers.value("extractor", json{}), "none",
                                            "CHAT_API_KEY");
    cfg.jobs = j.value("jobs", std::size_t{1});
    if (cfg.jobs == 0) cfg.jobs = 1;
    return cfg;
}

json RunConfig::to_json() const {
    return json{{"corpus", corpus_path},
                {"dataset", dataset_path},
                {"output_dir", output_dir},
                {"index_path", index_path},
                {"strategy", split_strategy_name(strategy)},
                {"split",
                 {{"chunk_size", split.chunk_size},
                  {"chunk_overlap", split.chunk_overlap},
                  {"min_chunk", split.min_chunk}}},
                {"retrieval",
                 {{"stage1_n", retrieval.stage1_n},
                  {"top_k", retrieval.top_k},
                  {"rrf_k0", retrieval.rrf_k0},
                  {"entity_augmentation", retrieval.entity_augmentation},
                  {"rerank_fallback", retrieval.rerank_fallback_passthrough}}},
                {"reflection",
                 {{"enabled", reflection.enabled}, {"max_rounds", reflection.max_rounds}}},
                {"decoding",
                 {{"temperature", chat_decoding.temperature},
                  {"top_p", chat_decoding.top_p},
                  {"max_tokens", chat_decoding.max_tokens}}},
                {"lexicon", lexicon_path ? json(*lexicon_path) : json()},
                {"template_dir", template_dir ? json(*template_dir) : json()},
                {"accuracy_threshold", accuracy_threshold},
                {"gold_match",
                 {{"mode", gold_match.mode == metrics::GoldMatchMode::ArticleLabel
                               ? "article_label"
                               : "key_text"},
                  {"key_text_threshold", gold_match.key_text_threshold},
                  {"span_coverage", gold_match.span_coverage_threshold}}},
                {"providers",
                 {{"embedding", embedding.to_json()},
                  {"chat", chat.to_json()},
                  {"rerank", rerank.to_json()},
                  {"judge", judge.to_json()},
                  {"extractor", extractor.to_json()}}},
                {"jobs", jobs}};
}

std::string RunConfig::digest() const { return hashing::sha256_hex(to_json().dump()); }

std::string RunConfig::effective_index_path() const {
    if (!index_path.empty()) return index_path;
    return (fs::path(output_dir) / "index.lgdx").string();
}

void RunConfig::validate_paths_for(bool needs_corpus, bool needs_dataset,
                                   bool needs_index) const {
    if (needs_corpus && (corpus_path.empty() || !fs::exists(corpus_path))) {
        raise(Errc::invalid_config, "corpus file not found: '" + corpus_path + "'");
    }
    if (needs_dataset && (dataset_path.empty() || !fs::exists(dataset_path))) {
        raise(Errc::invalid_config, "dataset file not found: '" + dataset_path + "'");
    }
    if (needs_index && !fs::exists(effective_index_path())) {
        raise(Errc::invalid_config,
              "index file not found: '" + effective_index_path() + "' (run `legrag index`)");
    }
}

// ---------------------------------------------------------------------------
// providers
// ---------------------------------------------------------------------------

namespace {

std::string env_or_empty(const std::string& name) {
    const char* v = std::getenv(name.c_str());
    return v ? std::string(v) : std::string{};
}

RemoteEndpoint endpoint_with_key(const ProviderSpec& spec) {
    RemoteEndpoint ep = spec.endpoint;
    ep.api_key = env_or_empty(spec.api_key_env);
    return ep;
}

} // namespace

std::vector<std::string> load_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open lexicon file: " + path);
    std::vector<std::string> terms;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        terms.push_back(line);
    }
    return terms;
}

BuiltProviders build_providers(const RunConfig& cfg) {
    BuiltProviders p;

    if (cfg.embedding.kind == "deterministic") {
        p.embedding = std::make_unique<DeterministicEmbeddingProvider>(cfg.embedding.dimension);
    } else if (cfg.embedding.kind == "remote") {
        p.embedding = std::make_unique<RemoteEmbeddingProvider>(endpoint_with_key(cfg.embedding),
                                                                cfg.embedding.dimension);
    } else {
        raise(Errc::invalid_config, "unknown embedding provider kind '" + cfg.embedding.kind + "'");
    }

    if (cfg.chat.kind == "mock") {
        p.chat = std::make_unique<MockChatClient>(cfg.chat_decoding);
    } else if (cfg.chat.kind == "remote") {
        p.chat = std::make_unique<RemoteChatClient>(endpoint_with_key(cfg.chat),
                                                    cfg.chat_decoding);
    } else if (cfg.chat.kind != "none") {
        raise(Errc::invalid_config, "unknown chat provider kind '" + cfg.chat.kind + "'");
    }

    if (cfg.rerank.kind == "remote") {
        p.reranker = std::make_unique<RemoteReranker>(endpoint_with_key(cfg.rerank));
    } else if (cfg.rerank.kind != "identity" && cfg.rerank.kind != "none") {
        raise(Errc::invalid_config, "unknown rerank provider kind '" + cfg.rerank.kind + "'");
    }

    if (cfg.judge.kind == "mock") {
        p.judge = std::make_unique<MockChatClient>(DecodingParams{0.0, 1.0, 1024});
    } else if (cfg.judge.kind == "remote") {
        p.judge = std::make_unique<RemoteChatClient>(endpoint_with_key(cfg.judge),
                                                     DecodingParams{0.0, 1.0, 1024});
    } else if (cfg.judge.kind != "none") {
        raise(Errc::invalid_config, "unknown judge provider kind '" + cfg.judge.kind + "'");
    }

    if (cfg.extractor.kind == "mock") {
        p.extractor = std::make_unique<MockChatClient>(cfg.chat_decoding);
    } else if (cfg.extractor.kind == "remote") {
        p.extractor = std::make_unique<RemoteChatClient>(endpoint_with_key(cfg.extractor),
                                                         cfg.chat_decoding);
    } else if (cfg.extractor.kind != "none") {
        raise(Errc::invalid_config, "unknown extractor kind '" + cfg.extractor.kind + "'");
    }
    return p;
}

// ---------------------------------------------------------------------------
// filesystem plumbing
// ---------------------------------------------------------------------------

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(Errc::io_error, "cannot write: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) raise(Errc::io_error, "short write: " + tmp.string());
    }
    fs::rename(tmp, path);
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io_error, "cannot open: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json template_hashes(const TemplateSet& t) {
    return json{{"answer_generation", t.answer.sha256},
                {"judge", t.judge.sha256},
                {"reflection", t.reflection.sha256},
                {"entity_extraction", t.entity.sha256}};
}

} // namespace

Runner::Runner(RunConfig cfg) : Runner(std::move(cfg), BuiltProviders{}) {
    providers_ = build_providers(cfg_);
}

Runner::Runner(RunConfig cfg, BuiltProviders providers)
    : cfg_(std::move(cfg)), providers_(std::move(providers)) {
    templates_ = load_templates(cfg_.template_dir);
    const fs::path overlay = fs::path(cfg_.output_dir) / "calibration.json";
    if (fs::exists(overlay)) {
        const json j = json::parse(read_file(overlay), nullptr, false);
        if (!j.is_discarded() && j.contains("accuracy_threshold")) {
            cfg_.accuracy_threshold = j["accuracy_threshold"].get<double>();
            cfg_.threshold_calibrated = true;
        }
    }
}

fs::path Runner::prepare_run_dir(const std::string& command) {
    const std::string run_id = command + "-" + cfg_.digest().substr(0, 12);
    const fs::path dir = fs::path(cfg_.output_dir) / run_id;
    fs::create_directories(dir);
    last_run_dir_ = dir;
    return dir;
}

void Runner::write_manifest(const fs::path& run_dir, const std::string& command,
                            const json& extra, const std::vector<std::string>& warnings) {
    json providers{{"embedding", providers_.embedding ? json(providers_.embedding->provider_id())
                                                      : json()},
                   {"chat", providers_.chat ? json(providers_.chat->client_id()) : json()},
                   {"rerank", providers_.reranker ? json(providers_.reranker->reranker_id())
                                                  : json("identity-passthrough")},
                   {"judge", providers_.judge ? json(providers_.judge->client_id()) : json()},
                   {"extractor",
                    providers_.extractor ? json(providers_.extractor->client_id()) : json()}};
    json manifest{{"artifact_version", kArtifactVersion},
                  {"command", command},
                  {"run_id", run_dir.filename().string()},
                  {"config_digest", cfg_.digest()},
                  {"config", cfg_.to_json()},
                  {"template_hashes", template_hashes(templates_)},
                  {"providers", std::move(providers)},
                  {"warnings", warnings}};
    for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
    write_file_atomic(run_dir / "manifest.json", manifest.dump(2) + "\n");
}

void Runner::finish_report(const fs::path& run_dir, const json& report,
                           const std::string& rendered_text) {
    write_file_atomic(run_dir / "report.json", report.dump(2) + "\n");
    write_file_atomic(run_dir / "report.txt", rendered_text);
}

// ---------------------------------------------------------------------------
// data loading
// ---------------------------------------------------------------------------

struct Runner::LoadedData {
    std::vector<LegalDocument> corpus;
    std::vector<QAEntry> dataset;
    HybridIndex index;
    std::unique_ptr<metrics::GoldResolver> resolver;
};

namespace {

json dataset_section(const std::vector<QAEntry>& entries) {
    const DatasetStats stats = dataset_stats(entries);
    json types = json::object();
    for (std::size_t i = 0; i < stats.type_counts.size(); ++i) {
        const auto& [type, count] = stats.type_counts[i];
        if (count == 0) continue;
        types[question_type_name(type)] = {{"count", count},
                                           {"fraction", stats.type_fractions[i].second}};
    }
    auto lengths = [](const TokenLengthStats& s) {
        return json{{"min", s.min}, {"max", s.max}, {"mean", s.mean}};
    };
    return json{{"entries", stats.entry_count},
                {"types", std::move(types)},
                {"question_tokens", lengths(stats.question)},
                {"answer_tokens", lengths(stats.answer)},
                {"reference_tokens", lengths(stats.reference)}};
}

json index_manifest_json(const BuildManifest& m) {
    return json{{"format_version", m.format_version},
                {"provider_id", m.provider_id},
                {"dimension", m.dimension},
                {"k1", m.lexical.k1},
                {"b", m.lexical.b},
                {"corpus_hash", m.corpus_hash},
                {"segment_count", m.segment_count}};
}

} // namespace

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

json Runner::cmd_index() {
    cfg_.validate_paths_for(true, false, false);
    const auto run_dir = prepare_run_dir("index");

    const auto corpus = load_corpus(cfg_.corpus_path);
    std::vector<std::string> lexicon;
    if (cfg_.lexicon_path) lexicon = load_lexicon(*cfg_.lexicon_path);

    std::vector<std::string> warnings = templates_.warnings;
    write_manifest(run_dir, "index", json::object(), warnings);

    const auto t0 = std::chrono::steady_clock::now();
    auto segments = split_corpus(corpus, cfg_.strategy, cfg_.split);
    std::size_t chunks = 0;
    std::size_t articles = 0;
    for (const auto& s : segments) {
        (s.granularity == Granularity::Chunk ? chunks : articles) += 1;
    }
    if (segments.empty()) {
        warnings.push_back("strategy '" + std::string(split_strategy_name(cfg_.strategy)) +
                           "' produced no segments; the index is empty");
    }

    auto index = HybridIndex::build(std::move(segments), *providers_.embedding, {},
                                    std::move(lexicon), 32, cfg_.jobs);
    const std::string index_path = cfg_.effective_index_path();
    fs::create_directories(fs::path(index_path).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(index_path).parent_path());
    index.save(index_path);
    const auto t1 = std::chrono::steady_clock::now();

    json report{{"kind", "index"},
                {"config_digest", cfg_.digest()},
                {"index_path", index_path},
                {"documents", corpus.size()},
                {"segments", index.size()},
                {"chunks", chunks},
                {"articles", articles},
                {"index_manifest", index_manifest_json(index.manifest())},
                {"warnings", warnings}};
    finish_report(run_dir, report, render_report_text(report));
    write_manifest(run_dir, "index",
                   json{{"index_manifest", index_manifest_json(index.manifest())},
                        {"timings_ms",
                         {{"wall", std::chrono::duration<double, std::milli>(t1 - t0).count()}}}},
                   warnings);
    return report;
}

namespace {

struct EvalEntryOutcome {
    RetrievalRun run;
    std::optional<GenerationResult> generation;
    std::optional<std::string> error;
};

json trace_row(const QAEntry& entry, const EvalEntryOutcome& outcome) {
    if (outcome.error) {
        return json{{"entry_id", entry.entry_id}, {"error", *outcome.error}};
    }
    const auto& run = outcome.run;
    json stage1 = json::array();
    for (const auto& s : run.stage1) stage1.push_back(scored_segment_to_json(s));
    json topk = json::array();
    for (const auto& s : run.topk) topk.push_back(scored_segment_to_json(s));
    json row{{"entry_id", entry.entry_id},
             {"query", run.query.original},
             {"entities", run.query.entities},
             {"stage1", std::move(stage1)},
             {"topk", std::move(topk)}};
    if (!run.warnings.empty()) row["warnings"] = run.warnings;
    return row;
}

metrics::RankedQuery ranked_from(const HybridIndex& index, const QAEntry& entry,
                                 const std::vector<ScoredSegment>& list) {
    metrics::RankedQuery q;
    q.entry_id = entry.entry_id;
    q.question_type = entry.question_type;
    q.golds = entry.references;
    q.candidates.reserve(list.size());
    for (const auto& s : list) {
        if (const Segment* seg = index.find_segment(s.segment_id)) {
            q.candidates.push_back(*seg);
        }
    }
    return q;
}

struct RetrievalMetricsBlock {
    std::size_t n = 0;
    double recall_at_5 = 0.0;
    double recall_at_20_stage1 = 0.0;
    double mrr_at_5 = 0.0;
    double map = 0.0;
};

json retrieval_metrics_json(const RetrievalMetricsBlock& m) {
    return json{{"n", m.n},
                {"recall_at_5", m.recall_at_5},
                {"recall_at_20_stage1", m.recall_at_20_stage1},
                {"mrr_at_5", m.mrr_at_5},
                {"map", m.map}};
}

RetrievalMetricsBlock retrieval_metrics_for(const std::vector<metrics::RankedQuery>& topk,
                                            const std::vector<metrics::RankedQuery>& stage1,
                                            const metrics::GoldMatchRule& rule,
                                            const metrics::GoldResolver* resolver,
                                            std::size_t top_k, std::size_t stage1_n) {
    RetrievalMetricsBlock m;
    m.n = topk.size();
    m.recall_at_5 = metrics::recall_at_k(topk, top_k, rule, resolver);
    m.recall_at_20_stage1 = metrics::recall_at_k(stage1, stage1_n, rule, resolver);
    m.mrr_at_5 = metrics::mrr_at_k(topk, top_k, rule, resolver);
    m.map = metrics::mean_average_precision(topk, rule, resolver);
    return m;
}

template <typename T>
std::vector<T> filter_by_type(const std::vector<T>& items, QuestionType type,
                              QuestionType (*get)(const T&)) {
    std::vector<T> out;
    for (const auto& item : items) {
        if (get(item) == type) out.push_back(item);
    }
    return out;
}

constexpr QuestionType kAllTypes[] = {QuestionType::ConceptExplanation,
                                      QuestionType::SummaryInduction,
                                      QuestionType::LogicalReasoning, QuestionType::Other};

} // namespace

json Runner::cmd_eval_retrieval() {
    cfg_.validate_paths_for(true, true, true);
    const auto run_dir = prepare_run_dir("eval-retrieval");

    LoadedData data;
    data.corpus = load_corpus(cfg_.corpus_path);
    data.dataset = load_qa_dataset(cfg_.dataset_path, &data.corpus);
    if (data.dataset.empty()) raise(Errc::empty_dataset, "dataset has no entries");
    data.index = HybridIndex::load(cfg_.effective_index_path());
    data.resolver = std::make_unique<metrics::GoldResolver>(data.corpus);

    std::vector<std::string> warnings = templates_.warnings;
    write_manifest(run_dir, "eval-retrieval",
                   json{{"index_manifest", index_manifest_json(data.index.manifest())}},
                   warnings);

    const auto t0 = std::chrono::steady_clock::now();
    RetrievalProviders rp;
    rp.embedding = providers_.embedding.get();
    rp.reranker = providers_.reranker.get();
    rp.entity_extractor = providers_.extractor.get();

    std::vector<EvalEntryOutcome> outcomes(data.dataset.size());
    parallel_for(data.dataset.size(), cfg_.jobs, [&](std::size_t i) {
        try {
            outcomes[i].run =
                retrieve(data.index, data.dataset[i].question, cfg_.retrieval, rp);
        } catch (const std::exception& e) {
            outcomes[i].error = e.what();
        }
    });

    std::string traces;
    for (std::size_t i = 0; i < data.dataset.size(); ++i) {
        traces += trace_row(data.dataset[i], outcomes[i]).dump() + "\n";
    }
    write_file_atomic(run_dir / "traces.jsonl", traces);

    std::vector<metrics::RankedQuery> topk_q;
    std::vector<metrics::RankedQuery> stage1_q;
    json failures = json::array();
    for (std::size_t i = 0; i < data.dataset.size(); ++i) {
        if (outcomes[i].error) {
            failures.push_back(
                json{{"entry_id", data.dataset[i].entry_id}, {"error", *outcomes[i].error}});
            continue;
        }
        topk_q.push_back(ranked_from(data.index, data.dataset[i], outcomes[i].run.topk));
        stage1_q.push_back(ranked_from(data.index, data.dataset[i], outcomes[i].run.stage1));
    }

    const auto overall =
        retrieval_metrics_for(topk_q, stage1_q, cfg_.gold_match, data.resolver.get(),
                              cfg_.retrieval.top_k, cfg_.retrieval.stage1_n);
    json per_type = json::object();
    for (QuestionType type : kAllTypes) {
        std::vector<metrics::RankedQuery> tq;
        std::vector<metrics::RankedQuery> sq;
        for (std::size_t i = 0; i < topk_q.size(); ++i) {
            if (topk_q[i].question_type == type) {
                tq.push_back(topk_q[i]);
                sq.push_back(stage1_q[i]);
            }
        }
        if (tq.empty()) continue;
        per_type[question_type_name(type)] = retrieval_metrics_json(
            retrieval_metrics_for(tq, sq, cfg_.gold_match, data.resolver.get(),
                                  cfg_.retrieval.top_k, cfg_.retrieval.stage1_n));
    }
    const auto t1 = std::chrono::steady_clock::now();

    json report{{"kind", "retrieval"},
                {"config_digest", cfg_.digest()},
                {"template_hashes", template_hashes(templates_)},
                {"dataset", dataset_section(data.dataset)},
                {"metrics", retrieval_metrics_json(overall)},
                {"per_type", std::move(per_type)},
                {"failures", std::move(failures)},
                {"reference_targets",
                 {{"recall_percent", kReferenceRecallPercent},
                  {"mrr_at_5_percent", kReferenceMrr5Percent}}},
                {"warnings", warnings}};
    finish_report(run_dir, report, render_report_text(report));
    write_manifest(run_dir, "eval-retrieval",
                   json{{"index_manifest", index_manifest_json(data.index.manifest())},
                        {"timings_ms",
                         {{"wall", std::chrono::duration<double, std::milli>(t1 - t0).count()}}}},
                   warnings);
    return report;
}

namespace {

struct GenerationMetricsBlock {
    std::size_t n = 0;
    double accuracy = 0.0;
    double bleu_mean = 0.0;
    double rouge_l_mean = 0.0;
    metrics::DsaResult dsa;
    metrics::SelectionScore selection;
};

json generation_metrics_json(const GenerationMetricsBlock& m) {
    json dsa{{"selected", m.dsa.selected}, {"recalled", m.dsa.recalled}};
    dsa["value"] = m.dsa.value ? json(*m.dsa.value) : json();
    return json{{"n", m.n},
                {"accuracy", m.accuracy},
                {"bleu_mean", m.bleu_mean},
                {"rouge_l_mean", m.rouge_l_mean},
                {"dsa", std::move(dsa)},
                {"selection",
                 {{"precision", m.selection.precision},
                  {"recall", m.selection.recall},
                  {"f1", m.selection.f1}}}};
}

struct GenerationRow {
    QuestionType type;
    std::string answer;
    std::string gold;
    double rouge_f1 = 0.0;
    double bleu_score = 0.0;
    metrics::DsaItem dsa_item;
};

GenerationMetricsBlock generation_metrics_for(const std::vector<GenerationRow>& rows,
                                              double threshold,
                                              const metrics::GoldMatchRule& rule,
                                              const metrics::GoldResolver* resolver) {
    GenerationMetricsBlock m;
    m.n = rows.size();
    if (rows.empty()) return m;
    std::vector<std::string> answers;
    std::vector<std::string> golds;
    std::vector<metrics::DsaItem> items;
    double bleu_sum = 0.0;
    double rouge_sum = 0.0;
    for (const auto& r : rows) {
        answers.push_back(r.answer);
        golds.push_back(r.gold);
        items.push_back(r.dsa_item);
        bleu_sum += r.bleu_score;
        rouge_sum += r.rouge_f1;
    }
    m.accuracy = metrics::accuracy(answers, golds, threshold);
    m.bleu_mean = bleu_sum / static_cast<double>(rows.size());
    m.rouge_l_mean = rouge_sum / static_cast<double>(rows.size());
    m.dsa = metrics::dsa(items, rule, resolver);
    m.selection = metrics::selection_score(items, rule, resolver);
    return m;
}

} // namespace

json Runner::cmd_eval_generation() {
    cfg_.validate_paths_for(true, true, true);
    if (!providers_.chat) raise(Errc::invalid_config, "eval-generation needs a chat provider");
    const auto run_dir = prepare_run_dir("eval-generation");

    LoadedData data;
    data.corpus = load_corpus(cfg_.corpus_path);
    data.dataset = load_qa_dataset(cfg_.dataset_path, &data.corpus);
    if (data.dataset.empty()) raise(Errc::empty_dataset, "dataset has no entries");
    data.index = HybridIndex::load(cfg_.effective_index_path());
    data.resolver = std::make_unique<metrics::GoldResolver>(data.corpus);

    std::vector<std::string> warnings = templates_.warnings;
    write_manifest(run_dir, "eval-generation",
                   json{{"index_manifest", index_manifest_json(data.index.manifest())}},
                   warnings);

    const auto t0 = std::chrono::steady_clock::now();
    PipelineClients clients;
    clients.chat = providers_.chat.get();
    clients.retrieval.embedding = providers_.embedding.get();
    clients.retrieval.reranker = providers_.reranker.get();
    clients.retrieval.entity_extractor = providers_.extractor.get();

    GenerationConfig gen_cfg;
    gen_cfg.max_reflection_rounds = cfg_.reflection.effective_rounds();
    gen_cfg.answer_template = &templates_.answer;
    gen_cfg.reflection_template = &templates_.reflection;

    std::vector<EvalEntryOutcome> outcomes(data.dataset.size());
    parallel_for(data.dataset.size(), cfg_.jobs, [&](std::size_t i) {
        try {
            outcomes[i].run = retrieve(data.index, data.dataset[i].question, cfg_.retrieval,
                                       clients.retrieval);
            outcomes[i].generation = answer_for_run(clients, data.index, outcomes[i].run,
                                                    cfg_.retrieval, gen_cfg);
        } catch (const std::exception& e) {
            outcomes[i].error = e.what();
        }
    });

    std::string traces;
    std::string answers_out;
    for (std::size_t i = 0; i < data.dataset.size(); ++i) {
        traces += trace_row(data.dataset[i], outcomes[i]).dump() + "\n";
        json row{{"entry_id", data.dataset[i].entry_id}};
        if (outcomes[i].error) {
            row["error"] = *outcomes[i].error;
        } else if (outcomes[i].generation) {
            const auto& g = *outcomes[i].generation;
            json rounds = json::array();
            for (const auto& r : g.reflection_rounds) {
                rounds.push_back(json{{"grounding", r.check_grounding},
                                      {"consistency", r.check_consistency},
                                      {"completeness", r.check_completeness},
                                      {"action", reflection_action_name(r.action_taken)}});
            }
            row["answer"] = g.answer;
            row["initial_answer"] = g.initial_answer;
            row["related_docs"] = g.related_docs;
            row["status"] = generation_status_name(g.status);
            row["reflection_rounds"] = std::move(rounds);
            if (!g.warnings.empty()) row["warnings"] = g.warnings;
        }
        answers_out += row.dump() + "\n";
    }
    write_file_atomic(run_dir / "traces.jsonl", traces);
    write_file_atomic(run_dir / "answers.jsonl", answers_out);

    std::vector<GenerationRow> rows;
    std::vector<metrics::RankedQuery> topk_q;
    std::vector<metrics::RankedQuery> stage1_q;
    json failures = json::array();
    for (std::size_t i = 0; i < data.dataset.size(); ++i) {
        const auto& entry = data.dataset[i];
        if (outcomes[i].error || !outcomes[i].generation) {
            failures.push_back(json{{"entry_id", entry.entry_id},
                                    {"error", outcomes[i].error.value_or("no result")}});
            continue;
        }
        const auto& g = *outcomes[i].generation;
        GenerationRow row;
        row.type = entry.question_type;
        row.answer = g.answer;
        row.gold = entry.gold_answer;
        row.rouge_f1 = metrics::rouge_l(g.answer, entry.gold_answer).f1;
        row.bleu_score = metrics::bleu(g.answer, entry.gold_answer);
        row.dsa_item.query = ranked_from(data.index, entry, outcomes[i].run.topk);
        row.dsa_item.related_docs = g.related_docs;
        rows.push_back(std::move(row));
        topk_q.push_back(ranked_from(data.index, entry, outcomes[i].run.topk));
        stage1_q.push_back(ranked_from(data.index, entry, outcomes[i].run.stage1));
    }

    const auto gen_overall = generation_metrics_for(rows, cfg_.accuracy_threshold,
                                                    cfg_.gold_match, data.resolver.get());
    const auto ret_overall =
        retrieval_metrics_for(topk_q, stage1_q, cfg_.gold_match, data.resolver.get(),
                              cfg_.retrieval.top_k, cfg_.retrieval.stage1_n);

    json per_type = json::object();
    for (QuestionType type : kAllTypes) {
        std::vector<GenerationRow> tr;
        for (const auto& r : rows) {
            if (r.type == type) tr.push_back(r);
        }
        if (tr.empty()) continue;
        per_type[question_type_name(type)] = generation_metrics_json(generation_metrics_for(
            tr, cfg_.accuracy_threshold, cfg_.gold_match, data.resolver.get()));
    }

    json judge_section;
    if (providers_.judge) {
        std::vector<judge::JudgeSample> samples;
        for (std::size_t i = 0; i < data.dataset.size(); ++i) {
            if (outcomes[i].error || !outcomes[i].generation) continue;
            if (outcomes[i].generation->answer.empty()) continue;
            judge::JudgeSample s;
            s.entry_id = data.dataset[i].entry_id;
            s.query = data.dataset[i].question;
            s.generated_answer = outcomes[i].generation->answer;
            s.reference_answer = data.dataset[i].gold_answer;
            for (const auto& scored : outcomes[i].run.topk) {
                if (const Segment* seg = data.index.find_segment(scored.segment_id)) {
                    s.retrieved_docs.push_back(seg->text);
                }
            }
            if (s.retrieved_docs.empty()) continue;
            samples.push_back(std::move(s));
        }
        const auto batch = judge::judge_batch(*providers_.judge, samples, {}, &templates_.judge,
                                              cfg_.jobs);
        std::string judge_lines;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            json row{{"entry_id", samples[i].entry_id}};
            if (batch.scores[i]) {
                const auto& sc = *batch.scores[i];
                row["relevance"] = sc.relevance;
                row["accuracy"] = sc.accuracy;
                row["completeness"] = sc.completeness;
                row["fluency"] = sc.fluency;
                row["total"] = sc.total;
                row["llm_score"] = sc.llm_score;
                row["warnings"] = sc.warnings;
            } else {
                row["error"] = "judge failed";
            }
            judge_lines += row.dump() + "\n";
        }
        write_file_atomic(run_dir / "judge.jsonl", judge_lines);
        judge_section = json{{"samples", samples.size()},
                             {"excluded", batch.excluded},
                             {"mean_llm_score",
                              batch.mean_llm_score ? json(*batch.mean_llm_score) : json()}};
    }
    const auto t1 = std::chrono::steady_clock::now();

    json report{{"kind", "generation"},
                {"config_digest", cfg_.digest()},
                {"template_hashes", template_hashes(templates_)},
                {"dataset", dataset_section(data.dataset)},
                {"accuracy_threshold", cfg_.accuracy_threshold},
                {"threshold_calibrated", cfg_.threshold_calibrated},
                {"metrics", generation_metrics_json(gen_overall)},
                {"retrieval", retrieval_metrics_json(ret_overall)},
                {"per_type", std::move(per_type)},
                {"failures", std::move(failures)},
                {"warnings", warnings}};
    if (!judge_section.is_null()) report["judge"] = std::move(judge_section);
    finish_report(run_dir, report, render_report_text(report));
    write_manifest(run_dir, "eval-generation",
                   json{{"index_manifest", index_manifest_json(data.index.manifest())},
                        {"timings_ms",
                         {{"wall", std::chrono::duration<double, std::milli>(t1 - t0).count()}}}},
                   warnings);
    return report;
}

json Runner::cmd_judge(const std::optional<std::string>& answers_run_dir,
                       const std::optional<std::string>& human_scores_csv) {
    cfg_.validate_paths_for(true, true, true);
    if (!providers_.judge) raise(Errc::invalid_config, "judge needs a judge provider");
    const fs::path source_dir =
        answers_run_dir ? fs::path(*answers_run_dir)
                        : fs::path(cfg_.output_dir) /
                              ("eval-generation-" + cfg_.digest().substr(0, 12));
    if (!fs::exists(source_dir / "answers.jsonl")) {
        raise(Errc::invalid_config,
              "no answers.jsonl under '" + source_dir.string() + "' (run eval-generation)");
    }
    const auto run_dir = prepare_run_dir("judge");

    LoadedData data;
    data.corpus = load_corpus(cfg_.corpus_path);
    data.dataset = load_qa_dataset(cfg_.dataset_path, &data.corpus);
    data.index = HybridIndex::load(cfg_.effective_index_path());

    std::vector<std::string> warnings = templates_.warnings;
    write_manifest(run_dir, "judge", json{{"answers_source", source_dir.string()}}, warnings);

    std::unordered_map<std::string, const QAEntry*> by_id;
    for (const auto& e : data.dataset) by_id[e.entry_id] = &e;

    // answers + topk ids from the generation run
    std::unordered_map<std::string, std::vector<std::string>> topk_ids;
    {
        std::istringstream in(read_file(source_dir / "traces.jsonl"));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.contains("topk")) continue;
            auto& ids = topk_ids[j.value("entry_id", "")];
            for (const auto& s : j["topk"]) ids.push_back(s.value("segment_id", ""));
        }
    }
    std::vector<judge::JudgeSample> samples;
    {
        std::istringstream in(read_file(source_dir / "answers.jsonl"));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || j.contains("error")) continue;
            const std::string entry_id = j.value("entry_id", "");
            auto it = by_id.find(entry_id);
            if (it == by_id.end()) continue;
            judge::JudgeSample s;
            s.entry_id = entry_id;
            s.query = it->second->question;
            s.reference_answer = it->second->gold_answer;
            s.generated_answer = j.value("answer", "");
            for (const auto& id : topk_ids[entry_id]) {
                if (const Segment* seg = data.index.find_segment(id)) {
                    s.retrieved_docs.push_back(seg->text);
                }
            }
            if (s.generated_answer.empty() || s.retrieved_docs.empty()) continue;
            samples.push_back(std::move(s));
        }
    }
    if (samples.empty()) raise(Errc::empty_dataset, "no judgeable samples in the answers file");

    const auto batch =
        judge::judge_batch(*providers_.judge, samples, {}, &templates_.judge, cfg_.jobs);

    std::string judge_lines;
    std::vector<double> llm_scores;
    std::vector<std::string> score_ids;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        json row{{"entry_id", samples[i].entry_id}};
        if (batch.scores[i]) {
            const auto& sc = *batch.scores[i];
            row["relevance"] = sc.relevance;
            row["accuracy"] = sc.accuracy;
            row["completeness"] = sc.completeness;
            row["fluency"] = sc.fluency;
            row["total"] = sc.total;
            row["llm_score"] = sc.llm_score;
            row["warnings"] = sc.warnings;
            llm_scores.push_back(sc.llm_score);
            score_ids.push_back(samples[i].entry_id);
        } else {
            row["error"] = "judge failed";
        }
        judge_lines += row.dump() + "\n";
    }
    write_file_atomic(run_dir / "judge.jsonl", judge_lines);

    json report{{"kind", "judge"},
                {"config_digest", cfg_.digest()},
                {"samples", samples.size()},
                {"excluded", batch.excluded},
                {"failures", batch.failures},
                {"mean_llm_score",
                 batch.mean_llm_score ? json(*batch.mean_llm_score) : json()},
                {"warnings", warnings}};

    if (human_scores_csv) {
        std::unordered_map<std::string, double> human;
        std::istringstream in(read_file(*human_scores_csv));
        std::string line;
        while (std::getline(in, line)) {
            const auto comma = line.find(',');
            if (comma == std::string::npos) continue;
            const std::string id = line.substr(0, comma);
            try {
                human[id] = std::stod(line.substr(comma + 1));
            } catch (...) {
                continue; // header or malformed row
            }
        }
        std::vector<double> paired_llm;
        std::vector<double> paired_human;
        for (std::size_t i = 0; i < llm_scores.size(); ++i) {
            auto it = human.find(score_ids[i]);
            if (it != human.end()) {
                paired_llm.push_back(llm_scores[i]);
                paired_human.push_back(it->second);
            }
        }
        if (paired_llm.size() >= 2) {
            const auto cred = judge::credibility_check(paired_llm, paired_human);
            report["credibility"] = json{{"rho", cred.rho},
                                         {"below_floor", cred.below_floor},
                                         {"reference_rho", cred.reference_rho},
                                         {"pairs", paired_llm.size()}};
        } else {
            report["credibility"] = json{{"error", "fewer than 2 aligned human scores"}};
        }
    }

    finish_report(run_dir, report, render_report_text(report));
    return report;
}

json Runner::cmd_calibrate(const std::string& labeled_scores_path) {
    const auto run_dir = prepare_run_dir("calibrate");
    std::vector<std::string> warnings = templates_.warnings;
    write_manifest(run_dir, "calibrate", json{{"labeled_scores", labeled_scores_path}},
                   warnings);

    std::vector<metrics::LabeledScore> samples;
    std::istringstream in(read_file(labeled_scores_path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        // "score,correct" or "entry_id,score,correct"; header rows skipped
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        if (cols.size() < 2) continue;
        const std::string& score_col = cols.size() >= 3 ? cols[1] : cols[0];
        const std::string& label_col = cols.back();
        try {
            metrics::LabeledScore s;
            s.score = std::stod(score_col);
            s.correct = label_col == "1" || label_col == "true" || label_col == "True";
            if (!(label_col == "0" || label_col == "false" || label_col == "False" ||
                  s.correct)) {
                continue;
            }
            samples.push_back(s);
        } catch (...) {
            continue;
        }
    }
    const auto result = metrics::calibrate_threshold(samples);
    for (const auto& w : result.warnings) warnings.push_back(w);

    const json overlay{{"accuracy_threshold", result.threshold},
                       {"agreement", result.agreement},
                       {"calibrated", true}};
    write_file_atomic(fs::path(cfg_.output_dir) / "calibration.json", overlay.dump(2) + "\n");

    json report{{"kind", "calibrate"},
                {"config_digest", cfg_.digest()},
                {"samples", samples.size()},
                {"threshold", result.threshold},
                {"agreement", result.agreement},
                {"overlay_path", (fs::path(cfg_.output_dir) / "calibration.json").string()},
                {"warnings", warnings}};
    finish_report(run_dir, report, render_report_text(report));
    return report;
}

json Runner::cmd_ask(const std::string& question, bool no_reflection, bool verbose) {
    if (text::is_blank(question)) raise(Errc::invalid_config, "question is empty");
    cfg_.validate_paths_for(false, false, true);
    if (!providers_.chat) raise(Errc::invalid_config, "ask needs a chat provider");
    const auto run_dir = prepare_run_dir("ask");

    HybridIndex index = HybridIndex::load(cfg_.effective_index_path());
    std::unordered_map<std::string, std::string> titles;
    if (!cfg_.corpus_path.empty() && fs::exists(cfg_.corpus_path)) {
        for (const auto& d : load_corpus(cfg_.corpus_path)) titles[d.doc_id] = d.title;
    }

    std::vector<std::string> warnings = templates_.warnings;
    write_manifest(run_dir, "ask", json{{"question", question}}, warnings);

    PipelineClients clients;
    clients.chat = providers_.chat.get();
    clients.retrieval.embedding = providers_.embedding.get();
    clients.retrieval.reranker = providers_.reranker.get();
    clients.retrieval.entity_extractor = providers_.extractor.get();

    GenerationConfig gen_cfg;
    gen_cfg.max_reflection_rounds = no_reflection ? 0 : cfg_.reflection.effective_rounds();
    gen_cfg.answer_template = &templates_.answer;
    gen_cfg.reflection_template = &templates_.reflection;

    RetrievalRun run;
    const GenerationResult result =
        answer_with_reflection(clients, index, question, cfg_.retrieval, gen_cfg, &run);

    json citations = json::array();
    for (const auto& id : result.related_docs) {
        if (const Segment* seg = index.find_segment(id)) {
            json c{{"segment_id", seg->segment_id}, {"doc_id", seg->doc_id}};
            auto title = titles.find(seg->doc_id);
            if (title != titles.end() && !title->second.empty()) c["title"] = title->second;
            if (seg->article_label) c["article_label"] = *seg->article_label;
            citations.push_back(std::move(c));
        }
    }
    json rounds = json::array();
    for (const auto& r : result.reflection_rounds) {
        rounds.push_back(json{{"grounding", r.check_grounding},
                              {"consistency", r.check_consistency},
                              {"completeness", r.check_completeness},
                              {"action", reflection_action_name(r.action_taken)}});
    }
    json report{{"kind", "ask"},
                {"question", question},
                {"answer", result.answer},
                {"status", generation_status_name(result.status)},
                {"citations", std::move(citations)},
                {"reflection_rounds", std::move(rounds)},
                {"warnings", result.warnings}};
    if (verbose) {
        json stage1 = json::array();
        for (const auto& s : run.stage1) stage1.push_back(scored_segment_to_json(s));
        report["stage1"] = std::move(stage1);
    }
    finish_report(run_dir, report, render_report_text(report));
    return report;
}

json Runner::cmd_sweep() {
    cfg_.validate_paths_for(true, true, false);
    const auto run_dir = prepare_run_dir("sweep");
    std::vector<std::string> warnings = templates_.warnings;
    write_manifest(run_dir, "sweep", json::object(), warnings);

    json rows = json::array();
    for (SplitStrategy strategy : {SplitStrategy::ChunkOnly, SplitStrategy::ArticleOnly,
                                   SplitStrategy::ChunkPlusArticle}) {
        RunConfig base = cfg_;
        base.strategy = strategy;
        base.index_path = (fs::path(cfg_.output_dir) /
                           (std::string("index-") + split_strategy_name(strategy) + ".lgdx"))
                              .string();
        {
            Runner indexer(base);
            indexer.cmd_index();
        }
        for (bool augmentation : {false, true}) {
            for (bool reflection_on : {false, true}) {
                RunConfig combo = base;
                combo.retrieval.entity_augmentation = augmentation;
                combo.reflection.enabled = reflection_on;
                Runner eval(combo);
                const json gen = eval.cmd_eval_generation();
                rows.push_back(json{{"strategy", split_strategy_name(strategy)},
                                    {"entity_augmentation", augmentation},
                                    {"reflection", reflection_on},
                                    {"run_dir", eval.last_run_dir().string()},
                                    {"metrics", gen["metrics"]},
                                    {"retrieval", gen["retrieval"]}});
            }
        }
    }
    json report{{"kind", "sweep"},
                {"config_digest", cfg_.digest()},
                {"rows", std::move(rows)},
                {"warnings", warnings}};
    finish_report(run_dir, report, render_report_text(report));
    return report;
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

namespace {

std::string pct(const json& v) {
    if (v.is_null()) return "   n/a";
    return fmt::format("{:6.2f}", v.get<double>() * 100.0);
}

void render_retrieval_block(std::string& out, const json& m) {
    out += fmt::format("  queries             {}\n", m.value("n", std::size_t{0}));
    out += fmt::format("  Recall@5 (%)        {}\n", pct(m["recall_at_5"]));
    out += fmt::format("  Recall@20/stage1 (%) {}\n", pct(m["recall_at_20_stage1"]));
    out += fmt::format("  MRR@5 (%)           {}\n", pct(m["mrr_at_5"]));
    out += fmt::format("  MAP (%)             {}\n", pct(m["map"]));
}

void render_generation_block(std::string& out, const json& m) {
    out += fmt::format("  answers             {}\n", m.value("n", std::size_t{0}));
    out += fmt::format("  Accuracy (%)        {}\n", pct(m["accuracy"]));
    out += fmt::format("  BLEU (%)            {}\n", pct(m["bleu_mean"]));
    out += fmt::format("  ROUGE-L (%)         {}\n", pct(m["rouge_l_mean"]));
    const auto& dsa = m["dsa"];
    if (dsa["value"].is_null()) {
        out += fmt::format("  DSA                 undefined (d={} D={})\n",
                           dsa.value("selected", std::size_t{0}),
                           dsa.value("recalled", std::size_t{0}));
    } else {
        out += fmt::format("  DSA (%)             {} (d={} D={})\n", pct(dsa["value"]),
                           dsa.value("selected", std::size_t{0}),
                           dsa.value("recalled", std::size_t{0}));
    }
    const auto& sel = m["selection"];
    out += fmt::format("  Selection P/R/F1 (%) {} / {} / {}\n", pct(sel["precision"]),
                       pct(sel["recall"]), pct(sel["f1"]));
}

} // namespace

std::string render_report_text(const json& report) {
    std::string out;
    const std::string kind = report.value("kind", "");
    if (kind == "index") {
        out += "== index ==\n";
        out += fmt::format("  documents  {}\n", report.value("documents", std::size_t{0}));
        out += fmt::format("  segments   {} ({} chunks, {} articles)\n",
                           report.value("segments", std::size_t{0}),
                           report.value("chunks", std::size_t{0}),
                           report.value("articles", std::size_t{0}));
        out += fmt::format("  index path {}\n", report.value("index_path", ""));
    } else if (kind == "retrieval") {
        out += "== retrieval evaluation ==\n";
        render_retrieval_block(out, report["metrics"]);
        if (report.contains("reference_targets")) {
            const auto& ref = report["reference_targets"];
            out += fmt::format("  reference targets   Recall {:.2f}%, MRR@5 {:.2f}%\n",
                               ref.value("recall_percent", 0.0),
                               ref.value("mrr_at_5_percent", 0.0));
        }
        for (const auto& [type, m] : report["per_type"].items()) {
            out += fmt::format("-- type: {} --\n", type);
            render_retrieval_block(out, m);
        }
    } else if (kind == "generation") {
        out += "== generation evaluation ==\n";
        out += fmt::format("  accuracy threshold  {:.4f}{}\n",
                           report.value("accuracy_threshold", 0.0),
                           report.value("threshold_calibrated", false) ? " (calibrated)"
                                                                       : " (uncalibrated)");
        render_generation_block(out, report["metrics"]);
        out += "-- retrieval --\n";
        render_retrieval_block(out, report["retrieval"]);
        if (report.contains("judge") && !report["judge"].is_null()) {
            const auto& jj = report["judge"];
            out += fmt::format("  LLM-Score mean (%)  {} over {} samples, {} excluded\n",
                               pct(jj["mean_llm_score"]),
                               jj.value("samples", std::size_t{0}),
                               jj.value("excluded", std::size_t{0}));
        }
        for (const auto& [type, m] : report["per_type"].items()) {
            out += fmt::format("-- type: {} --\n", type);
            render_generation_block(out, m);
        }
    } else if (kind == "judge") {
        out += "== judge ==\n";
        out += fmt::format("  samples    {} ({} excluded)\n",
                           report.value("samples", std::size_t{0}),
                           report.value("excluded", std::size_t{0}));
        out += fmt::format("  LLM-Score mean (%)  {}\n", pct(report["mean_llm_score"]));
        if (report.contains("credibility") && report["credibility"].contains("rho")) {
            const auto& c = report["credibility"];
            out += fmt::format("  Spearman rho        {:.4f} (reference {:.2f}){}\n",
                               c.value("rho", 0.0), c.value("reference_rho", 0.0),
                               c.value("below_floor", false)
                                   ? " [below credibility floor]"
                                   : "");
        }
    } else if (kind == "calibrate") {
        out += "== calibrate ==\n";
        out += fmt::format("  samples    {}\n", report.value("samples", std::size_t{0}));
        out += fmt::format("  threshold  {:.6f}\n", report.value("threshold", 0.0));
        out += fmt::format("  agreement  {:.4f}\n", report.value("agreement", 0.0));
    } else if (kind == "ask") {
        out += fmt::format("status: {}\n", report.value("status", ""));
        out += report.value("answer", "") + "\n";
        for (const auto& c : report["citations"]) {
            out += fmt::format("  - {}{}{}\n", c.value("doc_id", ""),
                               c.contains("title") ? " " + c["title"].get<std::string>() : "",
                               c.contains("article_label")
                                   ? " " + c["article_label"].get<std::string>()
                                   : "");
        }
    } else if (kind == "sweep") {
        out += "== sweep ==\n";
        out += fmt::format("{:<16} {:>4} {:>4} {:>9} {:>9} {:>9} {:>9}\n", "strategy", "aug",
                           "refl", "Recall@5", "MRR@5", "Acc", "ROUGE-L");
        for (const auto& row : report["rows"]) {
            out += fmt::format("{:<16} {:>4} {:>4} {:>9} {:>9} {:>9} {:>9}\n",
                               row.value("strategy", ""),
                               row.value("entity_augmentation", false) ? "on" : "off",
                               row.value("reflection", false) ? "on" : "off",
                               pct(row["retrieval"]["recall_at_5"]),
                               pct(row["retrieval"]["mrr_at_5"]),
                               pct(row["metrics"]["accuracy"]),
                               pct(row["metrics"]["rouge_l_mean"]));
        }
    } else {
        out = report.dump(2) + "\n";
    }
    if (report.contains("warnings")) {
        for (const auto& w : report["warnings"]) {
            out += fmt::format("warning: {}\n", w.get<std::string>());
        }
    }
    return out;
}

std::string render_comparison_text(const std::vector<json>& reports) {
    std::string out;
    out += fmt::format("{:<28} {:>9} {:>9} {:>9} {:>9} {:>9}\n", "run", "Recall@5", "MRR@5",
                       "MAP", "Acc", "ROUGE-L");
    for (const auto& r : reports) {
        const std::string kind = r.value("kind", "");
        const std::string label = r.value("config_digest", "").substr(0, 12) + "/" + kind;
        if (kind == "retrieval") {
            out += fmt::format("{:<28} {:>9} {:>9} {:>9} {:>9} {:>9}\n", label,
                               pct(r["metrics"]["recall_at_5"]), pct(r["metrics"]["mrr_at_5"]),
                               pct(r["metrics"]["map"]), "-", "-");
        } else if (kind == "generation") {
            out += fmt::format("{:<28} {:>9} {:>9} {:>9} {:>9} {:>9}\n", label,
                               pct(r["retrieval"]["recall_at_5"]),
                               pct(r["retrieval"]["mrr_at_5"]), pct(r["retrieval"]["map"]),
                               pct(r["metrics"]["accuracy"]),
                               pct(r["metrics"]["rouge_l_mean"]));
        }
    }
    return out;
}

} // namespace legrag
