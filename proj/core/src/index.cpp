#include "legrag/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "legrag/concurrency.hpp"
#include "legrag/errors.hpp"
#include "legrag/hashing.hpp"
#include "legrag/serde.hpp"
#include "legrag/text.hpp"

namespace legrag {

using nlohmann::json;

// ---------------------------------------------------------------------------
// serde
// ---------------------------------------------------------------------------

json segment_to_json(const Segment& s) {
    json j{{"segment_id", s.segment_id},
           {"doc_id", s.doc_id},
           {"granularity", granularity_name(s.granularity)},
           {"text", s.text},
           {"span", json::array({s.span_start, s.span_end})}};
    if (s.article_label) j["article_label"] = *s.article_label;
    return j;
}

Segment segment_from_json(const json& j) {
    Segment s;
    s.segment_id = j.at("segment_id").get<std::string>();
    s.doc_id = j.at("doc_id").get<std::string>();
    auto g = granularity_from_name(j.at("granularity").get<std::string>());
    if (!g) raise(Errc::malformed_record, "unknown granularity in segment record");
    s.granularity = *g;
    if (j.contains("article_label")) s.article_label = j["article_label"].get<std::string>();
    s.text = j.at("text").get<std::string>();
    s.span_start = j.at("span").at(0).get<std::size_t>();
    s.span_end = j.at("span").at(1).get<std::size_t>();
    return s;
}

json scored_segment_to_json(const ScoredSegment& s) {
    json j{{"segment_id", s.segment_id},
           {"lexical_score", s.lexical_score},
           {"vector_score", s.vector_score},
           {"fused_score", s.fused_score}};
    if (s.rerank_score) j["rerank_score"] = *s.rerank_score;
    return j;
}

// ---------------------------------------------------------------------------
// embedding providers
// ---------------------------------------------------------------------------

DeterministicEmbeddingProvider::DeterministicEmbeddingProvider(std::size_t dimension)
    : dimension_(dimension),
      id_("deterministic-ngram-" + std::to_string(dimension)) {
    if (dimension_ == 0) raise(Errc::invalid_config, "embedding dimension must be positive");
}

std::vector<float> DeterministicEmbeddingProvider::embed_one(std::string_view s) const {
    std::vector<double> acc(dimension_, 0.0);
    const auto cps = text::decode_utf8(s);
    for (std::size_t n = 1; n <= 3; ++n) {
        if (cps.size() < n) break;
        for (std::size_t i = 0; i + n <= cps.size(); ++i) {
            const std::size_t start = cps[i].byte_offset;
            const auto& last = cps[i + n - 1];
            const std::string_view gram =
                s.substr(start, last.byte_offset + last.byte_length - start);
            const std::uint64_t h = hashing::fnv1a64(gram);
            const std::size_t bucket = h % dimension_;
            const double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
            acc[bucket] += sign;
        }
    }
    double norm_sq = 0.0;
    for (double v : acc) norm_sq += v * v;
    if (norm_sq == 0.0) {
        acc[0] = 1.0;
        norm_sq = 1.0;
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    std::vector<float> out(dimension_);
    for (std::size_t i = 0; i < dimension_; ++i) {
        out[i] = static_cast<float>(acc[i] * inv);
    }
    return out;
}

std::vector<std::vector<float>> DeterministicEmbeddingProvider::embed_batch(
    std::span<const std::string> texts) {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

namespace {

void renormalize(std::vector<float>& v) {
    double norm_sq = 0.0;
    for (float x : v) norm_sq += static_cast<double>(x) * x;
    const double norm = std::sqrt(norm_sq);
    if (norm == 0.0) raise(Errc::dimension_mismatch, "provider returned a zero vector");
    if (std::abs(norm - 1.0) > 1e-6) {
        for (float& x : v) x = static_cast<float>(x / norm);
    }
}

} // namespace

std::vector<std::vector<float>> embed(EmbeddingProvider& provider,
                                      std::span<const std::string> texts) {
    auto vectors = provider.embed_batch(texts);
    if (vectors.size() != texts.size()) {
        raise(Errc::dimension_mismatch,
              "provider returned " + std::to_string(vectors.size()) + " vectors for " +
                  std::to_string(texts.size()) + " texts");
    }
    for (auto& v : vectors) {
        if (v.size() != provider.dimension()) {
            raise(Errc::dimension_mismatch,
                  "vector dimension " + std::to_string(v.size()) + " != provider dimension " +
                      std::to_string(provider.dimension()));
        }
        for (float x : v) {
            if (!std::isfinite(x)) {
                raise(Errc::dimension_mismatch, "provider returned a non-finite component");
            }
        }
        renormalize(v);
    }
    return vectors;
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

HybridIndex HybridIndex::build(std::vector<Segment> segments, EmbeddingProvider& provider,
                               LexicalParams params, std::vector<std::string> lexicon,
                               std::size_t embed_batch_size, std::size_t jobs) {
    HybridIndex idx;
    idx.segments_ = std::move(segments);
    idx.lexicon_ = std::move(lexicon);
    idx.rebuild_lookup();
    if (idx.id_to_idx_.size() != idx.segments_.size()) {
        raise(Errc::duplicate_segment_id, "segment ids are not unique");
    }

    const std::size_t n = idx.segments_.size();
    const std::size_t dim = provider.dimension();
    idx.vectors_.assign(n * dim, 0.0f);
    idx.doc_len_.assign(n, 0);

    // embed in batches, possibly concurrently; slots keep output order stable
    if (n > 0) {
        embed_batch_size = std::max<std::size_t>(1, embed_batch_size);
        const std::size_t batches = (n + embed_batch_size - 1) / embed_batch_size;
        std::vector<std::string> texts;
        texts.reserve(n);
        for (const auto& s : idx.segments_) texts.push_back(s.text);
        parallel_for(batches, jobs, [&](std::size_t b) {
            const std::size_t lo = b * embed_batch_size;
            const std::size_t hi = std::min(n, lo + embed_batch_size);
            auto vecs = embed(provider, std::span(texts).subspan(lo, hi - lo));
            for (std::size_t i = lo; i < hi; ++i) {
                std::copy(vecs[i - lo].begin(), vecs[i - lo].end(),
                          idx.vectors_.begin() + static_cast<std::ptrdiff_t>(i * dim));
            }
        });
    }

    std::uint64_t total_len = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto tokens = text::analyze(idx.segments_[i].text, idx.lexicon_);
        idx.doc_len_[i] = static_cast<std::uint32_t>(tokens.size());
        total_len += tokens.size();
        std::map<std::string, std::uint32_t> tf;
        for (const auto& t : tokens) ++tf[t];
        for (const auto& [term, count] : tf) {
            idx.postings_[term].emplace_back(static_cast<std::uint32_t>(i), count);
        }
    }
    idx.avgdl_ = n > 0 ? static_cast<double>(total_len) / static_cast<double>(n) : 0.0;

    std::string hash_input;
    for (const auto& s : idx.segments_) {
        hash_input += s.segment_id;
        hash_input.push_back('\x1f');
        hash_input += s.text;
        hash_input.push_back('\x1e');
    }
    idx.manifest_.format_version = 1;
    idx.manifest_.provider_id = provider.provider_id();
    idx.manifest_.dimension = dim;
    idx.manifest_.lexical = params;
    idx.manifest_.corpus_hash = hashing::sha256_hex(hash_input);
    idx.manifest_.segment_count = n;
    return idx;
}

void HybridIndex::rebuild_lookup() {
    id_to_idx_.clear();
    id_to_idx_.reserve(segments_.size());
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        id_to_idx_.emplace(segments_[i].segment_id, i);
    }
}

const Segment* HybridIndex::find_segment(std::string_view segment_id) const {
    auto it = id_to_idx_.find(std::string(segment_id));
    return it == id_to_idx_.end() ? nullptr : &segments_[it->second];
}

std::span<const float> HybridIndex::vector_of(std::size_t idx) const {
    const std::size_t dim = manifest_.dimension;
    return std::span(vectors_).subspan(idx * dim, dim);
}

// ---------------------------------------------------------------------------
// search
// ---------------------------------------------------------------------------

namespace {

/// Total order over candidates: score descending, segment_id ascending.
struct ScoreOrder {
    const std::vector<Segment>& segments;
    bool operator()(const std::pair<double, std::size_t>& a,
                    const std::pair<double, std::size_t>& b) const {
        if (a.first != b.first) return a.first > b.first;
        return segments[a.second].segment_id < segments[b.second].segment_id;
    }
};

} // namespace

std::vector<ScoredSegment> HybridIndex::vector_search(std::span<const float> query,
                                                      std::size_t k) const {
    if (query.size() != manifest_.dimension) {
        raise(Errc::dimension_mismatch,
              "query dimension " + std::to_string(query.size()) + " != index dimension " +
                  std::to_string(manifest_.dimension));
    }
    if (k == 0 || segments_.empty()) return {};

    double q_norm_sq = 0.0;
    for (float x : query) q_norm_sq += static_cast<double>(x) * x;
    const double q_inv = q_norm_sq > 0.0 ? 1.0 / std::sqrt(q_norm_sq) : 0.0;
    std::vector<double> q(query.size());
    for (std::size_t i = 0; i < query.size(); ++i) q[i] = query[i] * q_inv;

    const std::size_t dim = manifest_.dimension;
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(segments_.size());
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const float* row = vectors_.data() + i * dim;
        double dot = 0.0;
        for (std::size_t d = 0; d < dim; ++d) dot += q[d] * row[d];
        scored.emplace_back(dot, i);
    }
    std::sort(scored.begin(), scored.end(), ScoreOrder{segments_});
    if (scored.size() > k) scored.resize(k);

    std::vector<ScoredSegment> out;
    out.reserve(scored.size());
    for (const auto& [score, i] : scored) {
        ScoredSegment s;
        s.segment_id = segments_[i].segment_id;
        s.vector_score = score;
        s.stage = RetrievalStage::Stage1;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ScoredSegment> HybridIndex::keyword_search(std::string_view query,
                                                       std::size_t k) const {
    if (k == 0 || segments_.empty()) return {};
    const auto tokens = text::analyze(query, lexicon_);
    if (tokens.empty()) return {};

    const double n_docs = static_cast<double>(segments_.size());
    const double k1 = manifest_.lexical.k1;
    const double b = manifest_.lexical.b;

    std::unordered_map<std::size_t, double> scores;
    for (const auto& token : tokens) {
        auto it = postings_.find(token);
        if (it == postings_.end()) continue;
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (const auto& [seg_idx, tf] : it->second) {
            const double dl = static_cast<double>(doc_len_[seg_idx]);
            const double tf_d = static_cast<double>(tf);
            const double denom = tf_d + k1 * (1.0 - b + b * dl / avgdl_);
            scores[seg_idx] += idf * (tf_d * (k1 + 1.0)) / denom;
        }
    }
    if (scores.empty()) return {};

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(scores.size());
    for (const auto& [i, score] : scores) scored.emplace_back(score, i);
    std::sort(scored.begin(), scored.end(), ScoreOrder{segments_});
    if (scored.size() > k) scored.resize(k);

    std::vector<ScoredSegment> out;
    out.reserve(scored.size());
    for (const auto& [score, i] : scored) {
        ScoredSegment s;
        s.segment_id = segments_[i].segment_id;
        s.lexical_score = score;
        s.stage = RetrievalStage::Stage1;
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// persistence
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'L', 'G', 'D', 'X'};
constexpr std::uint8_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.append(buf, 4);
}

void put_u64(std::string& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.append(buf, 8);
}

class Reader {
public:
    explicit Reader(std::string_view data) : data_(data) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) {
            v = (v << 8) | static_cast<unsigned char>(data_[pos_ + static_cast<size_t>(i)]);
        }
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) {
            v = (v << 8) | static_cast<unsigned char>(data_[pos_ + static_cast<size_t>(i)]);
        }
        pos_ += 8;
        return v;
    }

    std::string_view bytes(std::size_t n) {
        need(n);
        auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    bool done() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) raise(Errc::corrupt_index, "truncated index file");
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

void append_section(std::string& out, std::string_view payload) {
    put_u64(out, payload.size());
    put_u32(out, hashing::crc32(payload));
    out.append(payload);
}

std::string_view read_section(Reader& r) {
    const std::uint64_t len = r.u64();
    const std::uint32_t crc = r.u32();
    auto payload = r.bytes(len);
    if (hashing::crc32(payload) != crc) {
        raise(Errc::corrupt_index, "section checksum mismatch");
    }
    return payload;
}

} // namespace

void HybridIndex::save(const std::string& path) const {
    std::string out;
    out.append(kMagic, 4);
    out.push_back(static_cast<char>(kFormatVersion));

    json manifest{{"format_version", manifest_.format_version},
                  {"provider_id", manifest_.provider_id},
                  {"dimension", manifest_.dimension},
                  {"k1", manifest_.lexical.k1},
                  {"b", manifest_.lexical.b},
                  {"corpus_hash", manifest_.corpus_hash},
                  {"segment_count", manifest_.segment_count}};
    append_section(out, manifest.dump());

    json segs = json::array();
    for (const auto& s : segments_) segs.push_back(segment_to_json(s));
    append_section(out, segs.dump());

    std::string vec_bytes(vectors_.size() * sizeof(float), '\0');
    if (!vectors_.empty()) {
        std::memcpy(vec_bytes.data(), vectors_.data(), vec_bytes.size());
    }
    append_section(out, vec_bytes);

    std::string postings;
    put_u64(postings, postings_.size());
    for (const auto& [term, plist] : postings_) {
        put_u32(postings, static_cast<std::uint32_t>(term.size()));
        postings.append(term);
        put_u64(postings, plist.size());
        for (const auto& [idx, tf] : plist) {
            put_u32(postings, idx);
            put_u32(postings, tf);
        }
    }
    put_u64(postings, doc_len_.size());
    for (std::uint32_t len : doc_len_) put_u32(postings, len);
    append_section(out, postings);

    append_section(out, json(lexicon_).dump());

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) raise(Errc::io_error, "cannot write index file: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) raise(Errc::io_error, "short write to index file: " + path);
}

HybridIndex HybridIndex::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) raise(Errc::io_error, "cannot open index file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string data = ss.str();

    Reader r(data);
    auto magic = r.bytes(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0) {
        raise(Errc::corrupt_index, "bad magic bytes");
    }
    const auto version = static_cast<std::uint8_t>(r.bytes(1)[0]);
    if (version != kFormatVersion) {
        raise(Errc::format_version_mismatch,
              "index format version " + std::to_string(version) + ", expected " +
                  std::to_string(kFormatVersion));
    }

    HybridIndex idx;
    const json manifest = json::parse(read_section(r));
    idx.manifest_.format_version = manifest.at("format_version").get<std::uint32_t>();
    idx.manifest_.provider_id = manifest.at("provider_id").get<std::string>();
    idx.manifest_.dimension = manifest.at("dimension").get<std::size_t>();
    idx.manifest_.lexical.k1 = manifest.at("k1").get<double>();
    idx.manifest_.lexical.b = manifest.at("b").get<double>();
    idx.manifest_.corpus_hash = manifest.at("corpus_hash").get<std::string>();
    idx.manifest_.segment_count = manifest.at("segment_count").get<std::size_t>();

    for (const auto& j : json::parse(read_section(r))) {
        idx.segments_.push_back(segment_from_json(j));
    }

    const auto vec_bytes = read_section(r);
    if (vec_bytes.size() != idx.segments_.size() * idx.manifest_.dimension * sizeof(float)) {
        raise(Errc::corrupt_index, "vector section size mismatch");
    }
    idx.vectors_.resize(vec_bytes.size() / sizeof(float));
    if (!vec_bytes.empty()) {
        std::memcpy(idx.vectors_.data(), vec_bytes.data(), vec_bytes.size());
    }

    const auto postings_bytes = read_section(r);
    Reader pr(postings_bytes);
    const std::uint64_t term_count = pr.u64();
    for (std::uint64_t t = 0; t < term_count; ++t) {
        const std::uint32_t term_len = pr.u32();
        std::string term(pr.bytes(term_len));
        const std::uint64_t plen = pr.u64();
        auto& plist = idx.postings_[term];
        plist.reserve(plen);
        for (std::uint64_t p = 0; p < plen; ++p) {
            const std::uint32_t seg_idx = pr.u32();
            const std::uint32_t tf = pr.u32();
            if (seg_idx >= idx.segments_.size()) {
                raise(Errc::corrupt_index, "posting references unknown segment");
            }
            plist.emplace_back(seg_idx, tf);
        }
    }
    const std::uint64_t len_count = pr.u64();
    if (len_count != idx.segments_.size()) {
        raise(Errc::corrupt_index, "doc length table size mismatch");
    }
    idx.doc_len_.reserve(len_count);
    std::uint64_t total_len = 0;
    for (std::uint64_t i = 0; i < len_count; ++i) {
        idx.doc_len_.push_back(pr.u32());
        total_len += idx.doc_len_.back();
    }
    idx.avgdl_ = !idx.segments_.empty()
                     ? static_cast<double>(total_len) / static_cast<double>(idx.segments_.size())
                     : 0.0;

    idx.lexicon_ = json::parse(read_section(r)).get<std::vector<std::string>>();

    if (idx.manifest_.segment_count != idx.segments_.size()) {
        raise(Errc::corrupt_index, "segment count disagrees with manifest");
    }
    idx.rebuild_lookup();
    return idx;
}

} // namespace legrag
