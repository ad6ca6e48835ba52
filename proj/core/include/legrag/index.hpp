#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "legrag/splitter.hpp"

namespace legrag {

/// Emits one unit-normalized vector of fixed dimension per input text.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual const std::string& provider_id() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::vector<std::vector<float>> embed_batch(std::span<const std::string> texts) = 0;
};

/// Pure function of the text: signed hashed character n-gram counts
/// (n = 1..3 over code points) projected onto `dimension` buckets, then
/// L2-normalized. Used for offline tests and oracle checks.
class DeterministicEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit DeterministicEmbeddingProvider(std::size_t dimension = 256);

    const std::string& provider_id() const override { return id_; }
    std::size_t dimension() const override { return dimension_; }
    std::vector<std::vector<float>> embed_batch(std::span<const std::string> texts) override;

    std::vector<float> embed_one(std::string_view text) const;

private:
    std::size_t dimension_;
    std::string id_;
};

/// Validates the provider contract: one vector per text, expected dimension,
/// finite components, unit L2 norm (re-normalizing within tolerance).
std::vector<std::vector<float>> embed(EmbeddingProvider& provider,
                                      std::span<const std::string> texts);

struct LexicalParams {
    double k1 = 1.5;
    double b = 0.75;
};

enum class RetrievalStage { Stage1, Stage2 };

struct ScoredSegment {
    std::string segment_id;
    double lexical_score = 0.0;          // BM25; 0 when outside the lexical list
    double vector_score = 0.0;           // cosine; 0 when outside the vector list
    double fused_score = 0.0;            // RRF
    std::optional<double> rerank_score;  // required at Stage2
    RetrievalStage stage = RetrievalStage::Stage1;
};

struct BuildManifest {
    std::uint32_t format_version = 1;
    std::string provider_id;
    std::size_t dimension = 0;
    LexicalParams lexical;
    std::string corpus_hash; // SHA-256 over segment ids and texts
    std::size_t segment_count = 0;
};

/// Immutable hybrid retrieval database: an exact-scan vector index plus a
/// BM25 inverted index over the same segment set. Safe for concurrent reads.
class HybridIndex {
public:
    HybridIndex() = default;

    static HybridIndex build(std::vector<Segment> segments, EmbeddingProvider& provider,
                             LexicalParams params = {},
                             std::vector<std::string> lexicon = {},
                             std::size_t embed_batch_size = 32, std::size_t jobs = 1);

    /// Top-k by cosine, descending, ties broken by ascending segment_id.
    /// The query is L2-normalized once before scanning.
    std::vector<ScoredSegment> vector_search(std::span<const float> query,
                                             std::size_t k) const;

    /// Top-k by BM25 (query analyzed with the index lexicon). Segments
    /// containing none of the query terms never appear.
    std::vector<ScoredSegment> keyword_search(std::string_view query, std::size_t k) const;

    std::size_t size() const { return segments_.size(); }
    const std::vector<Segment>& segments() const { return segments_; }
    const Segment* find_segment(std::string_view segment_id) const;
    std::span<const float> vector_of(std::size_t idx) const;
    const BuildManifest& manifest() const { return manifest_; }
    const std::vector<std::string>& lexicon() const { return lexicon_; }

    /// Versioned binary container: "LGDX" magic, version byte, then
    /// length-prefixed CRC-checked sections (manifest, segments, vectors,
    /// postings, lexicon). Rebuilding from identical inputs is byte-identical.
    void save(const std::string& path) const;
    static HybridIndex load(const std::string& path);

private:
    std::vector<Segment> segments_;
    std::unordered_map<std::string, std::size_t> id_to_idx_;
    std::vector<float> vectors_; // row-major, segment_count x dimension
    std::map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> postings_;
    std::vector<std::uint32_t> doc_len_;
    double avgdl_ = 0.0;
    std::vector<std::string> lexicon_;
    BuildManifest manifest_;

    void rebuild_lookup();
};

} // namespace legrag
