#include "legrag/splitter.hpp"

#include <algorithm>

#include "legrag/errors.hpp"
#include "legrag/text.hpp"

namespace legrag {

const char* granularity_name(Granularity g) noexcept {
    return g == Granularity::Chunk ? "chunk" : "article";
}

std::optional<Granularity> granularity_from_name(std::string_view name) noexcept {
    if (name == "chunk") return Granularity::Chunk;
    if (name == "article") return Granularity::Article;
    return std::nullopt;
}

const char* split_strategy_name(SplitStrategy s) noexcept {
    switch (s) {
        case SplitStrategy::ChunkOnly: return "chunk";
        case SplitStrategy::ArticleOnly: return "article";
        case SplitStrategy::ChunkPlusArticle: return "chunk+article";
    }
    return "chunk+article";
}

std::optional<SplitStrategy> split_strategy_from_name(std::string_view name) noexcept {
    if (name == "chunk") return SplitStrategy::ChunkOnly;
    if (name == "article") return SplitStrategy::ArticleOnly;
    if (name == "chunk+article" || name == "dual") return SplitStrategy::ChunkPlusArticle;
    return std::nullopt;
}

void SplitConfig::validate() const {
    if (chunk_size < 4) raise(Errc::invalid_config, "chunk_size must be at least 4");
    if (chunk_overlap >= chunk_size) {
        raise(Errc::invalid_config, "chunk_overlap must be smaller than chunk_size");
    }
    if (min_chunk > chunk_size) {
        raise(Errc::invalid_config, "min_chunk must not exceed chunk_size");
    }
}

namespace {

Segment make_segment(const LegalDocument& doc, Granularity g, std::size_t ordinal,
                     std::size_t start, std::size_t end,
                     std::optional<std::string> label = std::nullopt) {
    Segment s;
    s.segment_id =
        doc.doc_id + ":" + granularity_name(g) + ":" + std::to_string(ordinal);
    s.doc_id = doc.doc_id;
    s.granularity = g;
    s.article_label = std::move(label);
    s.text = doc.body.substr(start, end - start);
    s.span_start = start;
    s.span_end = end;
    return s;
}

/// A marker counts only at line start / document start or after
/// sentence-final punctuation (whitespace in between allowed).
bool marker_position_ok(const std::vector<text::CodePoint>& cps, std::size_t marker_byte) {
    std::size_t i = cps.size();
    // locate the code point index of the marker start
    for (std::size_t k = 0; k < cps.size(); ++k) {
        if (cps[k].byte_offset == marker_byte) {
            i = k;
            break;
        }
    }
    while (i > 0) {
        const char32_t prev = cps[i - 1].value;
        if (prev == U'\n') return true;
        if (text::is_space(prev)) {
            --i;
            continue;
        }
        return text::is_sentence_terminal(prev);
    }
    return true; // document start
}

struct UnitSpan {
    std::size_t start;
    std::size_t end;
};

/// Contiguous sentence units partitioning [0, body.size()); each ends just
/// after a sentence terminal or at document end.
std::vector<UnitSpan> sentence_units(const std::vector<text::CodePoint>& cps,
                                     std::size_t body_size) {
    std::vector<UnitSpan> units;
    std::size_t start = 0;
    for (const auto& cp : cps) {
        if (text::is_sentence_terminal(cp.value)) {
            const std::size_t end = cp.byte_offset + cp.byte_length;
            units.push_back({start, end});
            start = end;
        }
    }
    if (start < body_size) units.push_back({start, body_size});
    return units;
}

/// Slices any unit longer than max_len at code point boundaries.
std::vector<UnitSpan> limit_unit_length(const std::vector<UnitSpan>& units,
                                        const std::vector<text::CodePoint>& cps,
                                        std::size_t max_len) {
    std::vector<UnitSpan> out;
    std::size_t cp_idx = 0;
    for (const auto& u : units) {
        if (u.end - u.start <= max_len) {
            out.push_back(u);
            continue;
        }
        while (cp_idx < cps.size() && cps[cp_idx].byte_offset < u.start) ++cp_idx;
        std::size_t piece_start = u.start;
        std::size_t last_boundary = u.start;
        for (std::size_t k = cp_idx; k < cps.size() && cps[k].byte_offset < u.end; ++k) {
            const std::size_t cp_end = cps[k].byte_offset + cps[k].byte_length;
            if (cp_end - piece_start > max_len) {
                out.push_back({piece_start, last_boundary});
                piece_start = last_boundary;
            }
            last_boundary = cp_end;
        }
        if (piece_start < u.end) out.push_back({piece_start, u.end});
    }
    return out;
}

} // namespace

std::vector<Segment> split_articles(const LegalDocument& doc) {
    const auto markers = text::find_article_markers(doc.body);
    if (markers.empty()) return {};

    const auto cps = text::decode_utf8(doc.body);
    std::vector<text::ArticleMarker> kept;
    long counter = 0;
    for (const auto& m : markers) {
        if (!marker_position_ok(cps, m.byte_offset)) continue;
        if (m.number <= counter) continue; // citation or repeat, not a new article
        kept.push_back(m);
        counter = m.number;
    }

    std::vector<Segment> segments;
    segments.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const std::size_t start = kept[i].byte_offset;
        const std::size_t end =
            (i + 1 < kept.size()) ? kept[i + 1].byte_offset : doc.body.size();
        segments.push_back(make_segment(doc, Granularity::Article, i, start, end,
                                        text::article_label(kept[i].number)));
    }
    return segments;
}

std::vector<Segment> split_chunks(const LegalDocument& doc, const SplitConfig& cfg) {
    cfg.validate();
    if (doc.body.empty() || text::is_blank(doc.body)) return {};

    const auto cps = text::decode_utf8(doc.body);
    auto units = sentence_units(cps, doc.body.size());
    units = limit_unit_length(units, cps, cfg.chunk_size);

    struct ChunkSpan {
        std::size_t start;
        std::size_t end;
    };
    std::vector<ChunkSpan> chunks;
    std::size_t a = 0;
    while (a < units.size()) {
        const std::size_t start = units[a].start;
        std::size_t b = a;
        while (b < units.size()) {
            const std::size_t cur_len = (b == a) ? 0 : units[b - 1].end - start;
            const std::size_t new_len = units[b].end - start;
            if (cur_len < cfg.min_chunk || new_len <= cfg.chunk_size) {
                ++b;
            } else {
                break;
            }
        }
        if (b == a) b = a + 1; // defensive; units are pre-limited to chunk_size
        const std::size_t end = units[b - 1].end;
        chunks.push_back({start, end});
        if (end >= doc.body.size()) break;

        // carry chunk_overlap back: restart at the first unit boundary
        // within the overlap window, but always make progress
        std::size_t next_a = b;
        const std::size_t overlap_from =
            (end > cfg.chunk_overlap) ? end - cfg.chunk_overlap : 0;
        for (std::size_t u = a + 1; u <= b && u < units.size(); ++u) {
            if (units[u].start >= overlap_from) {
                next_a = u;
                break;
            }
        }
        a = std::max(next_a, a + 1);
    }

    // fold an undersized tail into the previous chunk
    if (chunks.size() >= 2 &&
        chunks.back().end - chunks.back().start < cfg.min_chunk) {
        chunks[chunks.size() - 2].end = chunks.back().end;
        chunks.pop_back();
    }

    std::vector<Segment> segments;
    segments.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        segments.push_back(
            make_segment(doc, Granularity::Chunk, i, chunks[i].start, chunks[i].end));
    }
    return segments;
}

std::vector<Segment> split_dual(const LegalDocument& doc, const SplitConfig& cfg) {
    auto segments = split_chunks(doc, cfg);
    auto articles = split_articles(doc);
    segments.insert(segments.end(), std::make_move_iterator(articles.begin()),
                    std::make_move_iterator(articles.end()));
    return segments;
}

std::vector<Segment> split_corpus(const std::vector<LegalDocument>& docs,
                                  SplitStrategy strategy, const SplitConfig& cfg) {
    std::vector<Segment> all;
    for (const auto& doc : docs) {
        std::vector<Segment> segs;
        switch (strategy) {
            case SplitStrategy::ChunkOnly: segs = split_chunks(doc, cfg); break;
            case SplitStrategy::ArticleOnly: segs = split_articles(doc); break;
            case SplitStrategy::ChunkPlusArticle: segs = split_dual(doc, cfg); break;
        }
        all.insert(all.end(), std::make_move_iterator(segs.begin()),
                   std::make_move_iterator(segs.end()));
    }
    return all;
}

} // namespace legrag
