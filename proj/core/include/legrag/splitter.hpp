#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "legrag/corpus.hpp"

namespace legrag {

enum class Granularity { Chunk, Article };

const char* granularity_name(Granularity g) noexcept;
std::optional<Granularity> granularity_from_name(std::string_view name) noexcept;

/// A retrievable unit at chunk or article granularity. `span` is a
/// half-open [start, end) byte range into the source body and `text` is
/// exactly body.substr(start, end - start).
struct Segment {
    std::string segment_id; // "<doc_id>:<granularity>:<ordinal>"
    std::string doc_id;
    Granularity granularity = Granularity::Chunk;
    std::optional<std::string> article_label; // Article granularity only
    std::string text;
    std::size_t span_start = 0;
    std::size_t span_end = 0;
};

struct SplitConfig {
    std::size_t chunk_size = 512;  // target bytes per chunk
    std::size_t chunk_overlap = 64;
    std::size_t min_chunk = 32;

    void validate() const;
};

enum class SplitStrategy { ChunkOnly, ArticleOnly, ChunkPlusArticle };

const char* split_strategy_name(SplitStrategy s) noexcept;
std::optional<SplitStrategy> split_strategy_from_name(std::string_view name) noexcept;

/// One Article segment per detected "第N条" marker, ordered by span start.
/// Markers must strictly increase the running article number; others are
/// treated as in-text citations and skipped. Each segment runs from its
/// marker to the next kept marker (or document end). No markers -> empty.
std::vector<Segment> split_articles(const LegalDocument& doc);

/// Greedy sentence packing up to cfg.chunk_size with cfg.chunk_overlap
/// carried back to the next chunk. Chunk spans cover the whole body.
std::vector<Segment> split_chunks(const LegalDocument& doc, const SplitConfig& cfg = {});

/// split_chunks followed by split_articles.
std::vector<Segment> split_dual(const LegalDocument& doc, const SplitConfig& cfg = {});

/// Applies the configured strategy across a corpus.
std::vector<Segment> split_corpus(const std::vector<LegalDocument>& docs,
                                  SplitStrategy strategy, const SplitConfig& cfg = {});

} // namespace legrag
