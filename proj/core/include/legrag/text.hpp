#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace legrag::text {

/// One decoded code point plus its byte span in the source string.
struct CodePoint {
    char32_t value = 0;
    std::size_t byte_offset = 0;
    std::size_t byte_length = 0;
};

/// Decodes UTF-8, mapping invalid sequences to U+FFFD one byte at a time.
std::vector<CodePoint> decode_utf8(std::string_view s);

std::string encode_utf8(char32_t cp);

bool is_cjk(char32_t cp) noexcept;

/// Wide characters that stand on their own in tokenization: CJK ideographs,
/// kana, fullwidth forms and CJK punctuation.
bool is_wide(char32_t cp) noexcept;

bool is_space(char32_t cp) noexcept;

/// Sentence-final punctuation used for clause and chunk boundaries.
bool is_sentence_terminal(char32_t cp) noexcept;

/// Parses a Chinese numeral (一二三...十百千 plus 零/〇/两) to an integer.
/// Returns nullopt for anything that is not a well-formed numeral.
std::optional<long> parse_chinese_numeral(std::u32string_view digits);

/// Result of scanning for an article marker such as "第十九条" or "第19条".
struct ArticleMarker {
    long number = 0;
    std::size_t byte_offset = 0; // start of "第"
    std::size_t byte_length = 0; // through the trailing "条"
};

/// Finds every "第<numeral>条" marker in the text, in order of appearance.
/// Numerals may be Chinese or ASCII digits.
std::vector<ArticleMarker> find_article_markers(std::string_view body);

/// Normalizes "第十九条", "第19条" and "Article 19" to the canonical
/// "Article 19" form. Returns nullopt if no article number is recognizable.
std::optional<std::string> normalize_article_label(std::string_view label);

/// Canonical label for a parsed article number.
std::string article_label(long number);

using TokenCounter = std::function<std::size_t(std::string_view)>;

/// Default token counter: each wide (CJK) code point is one token, other
/// non-space runs count as whitespace-delimited words.
std::size_t count_tokens(std::string_view s);

/// Tokenization used by the text-overlap metrics. Character tokens for text
/// containing CJK (and for unspaced text), whitespace words otherwise.
std::vector<std::string> metric_tokens(std::string_view s);

/// Lexical analyzer for the inverted index: overlapping CJK character
/// bigrams, lowercased ASCII words, canonical article-label terms, and any
/// lexicon terms found as substrings (each indexed as a single term).
std::vector<std::string> analyze(std::string_view s,
                                 const std::vector<std::string>& lexicon = {});

std::string to_lower_ascii(std::string_view s);

/// Collapses runs of whitespace to single spaces and trims the ends.
std::string normalize_whitespace(std::string_view s);

bool is_blank(std::string_view s);

} // namespace legrag::text
