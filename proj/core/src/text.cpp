#include "legrag/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace legrag::text {

std::vector<CodePoint> decode_utf8(std::string_view s) {
    std::vector<CodePoint> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0 && i + 1 < s.size() &&
                   (static_cast<unsigned char>(s[i + 1]) & 0xC0) == 0x80) {
            cp = static_cast<char32_t>(b0 & 0x1F) << 6 |
                 (static_cast<unsigned char>(s[i + 1]) & 0x3F);
            len = 2;
            if (cp < 0x80) cp = 0xFFFD; // overlong
        } else if ((b0 & 0xF0) == 0xE0 && i + 2 < s.size() &&
                   (static_cast<unsigned char>(s[i + 1]) & 0xC0) == 0x80 &&
                   (static_cast<unsigned char>(s[i + 2]) & 0xC0) == 0x80) {
            cp = static_cast<char32_t>(b0 & 0x0F) << 12 |
                 (static_cast<char32_t>(static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6) |
                 (static_cast<unsigned char>(s[i + 2]) & 0x3F);
            len = 3;
            if (cp < 0x800) cp = 0xFFFD;
        } else if ((b0 & 0xF8) == 0xF0 && i + 3 < s.size() &&
                   (static_cast<unsigned char>(s[i + 1]) & 0xC0) == 0x80 &&
                   (static_cast<unsigned char>(s[i + 2]) & 0xC0) == 0x80 &&
                   (static_cast<unsigned char>(s[i + 3]) & 0xC0) == 0x80) {
            cp = static_cast<char32_t>(b0 & 0x07) << 18 |
                 (static_cast<char32_t>(static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12) |
                 (static_cast<char32_t>(static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6) |
                 (static_cast<unsigned char>(s[i + 3]) & 0x3F);
            len = 4;
            if (cp < 0x10000 || cp > 0x10FFFF) cp = 0xFFFD;
        }
        out.push_back({cp, i, len});
        i += len;
    }
    return out;
}

std::string encode_utf8(char32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
    return out;
}

bool is_cjk(char32_t cp) noexcept {
    return (cp >= 0x4E00 && cp <= 0x9FFF) ||   // unified ideographs
           (cp >= 0x3400 && cp <= 0x4DBF) ||   // extension A
           (cp >= 0xF900 && cp <= 0xFAFF) ||   // compatibility ideographs
           (cp >= 0x20000 && cp <= 0x2A6DF);   // extension B
}

bool is_wide(char32_t cp) noexcept {
    return is_cjk(cp) ||
           (cp >= 0x3000 && cp <= 0x303F) ||   // CJK punctuation
           (cp >= 0x3040 && cp <= 0x30FF) ||   // kana
           (cp >= 0xFF00 && cp <= 0xFFEF);     // fullwidth forms
}

bool is_space(char32_t cp) noexcept {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' ||
           cp == U'\v' || cp == 0x3000 || cp == 0x00A0;
}

bool is_sentence_terminal(char32_t cp) noexcept {
    switch (cp) {
        case 0x3002: // 。
        case 0xFF1B: // ；
        case 0xFF01: // ！
        case 0xFF1F: // ？
        case U';':
        case U'!':
        case U'?':
        case U'\n':
            return true;
        default:
            return false;
    }
}

namespace {

std::optional<int> chinese_digit(char32_t cp) {
    switch (cp) {
        case 0x96F6: case 0x3007: return 0;        // 零 〇
        case 0x4E00: return 1;                     // 一
        case 0x4E8C: case 0x4E24: return 2;        // 二 两
        case 0x4E09: return 3;                     // 三
        case 0x56DB: return 4;                     // 四
        case 0x4E94: return 5;                     // 五
        case 0x516D: return 6;                     // 六
        case 0x4E03: return 7;                     // 七
        case 0x516B: return 8;                     // 八
        case 0x4E5D: return 9;                     // 九
        default: return std::nullopt;
    }
}

std::optional<long> chinese_unit(char32_t cp) {
    switch (cp) {
        case 0x5341: return 10;    // 十
        case 0x767E: return 100;   // 百
        case 0x5343: return 1000;  // 千
        default: return std::nullopt;
    }
}

} // namespace

std::optional<long> parse_chinese_numeral(std::u32string_view digits) {
    if (digits.empty()) return std::nullopt;
    long total = 0;
    long pending = -1; // digit awaiting a unit
    bool any = false;
    for (char32_t cp : digits) {
        if (auto d = chinese_digit(cp)) {
            if (pending >= 0) {
                // two digits in a row only valid around zero, e.g. 一百零三
                if (pending != 0) return std::nullopt;
            }
            pending = (pending == 0) ? *d : *d;
            any = true;
        } else if (auto u = chinese_unit(cp)) {
            long factor = (pending >= 1) ? pending : 1; // 十三 == 一十三
            total += factor * *u;
            pending = -1;
            any = true;
        } else {
            return std::nullopt;
        }
    }
    if (pending > 0 || (pending == 0 && total == 0)) {
        total += std::max(pending, 0L);
    }
    if (!any || total <= 0) return std::nullopt;
    return total;
}

std::vector<ArticleMarker> find_article_markers(std::string_view body) {
    std::vector<ArticleMarker> out;
    const auto cps = decode_utf8(body);
    const char32_t kDi = 0x7B2C;   // 第
    const char32_t kTiao = 0x6761; // 条
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (cps[i].value != kDi) continue;
        // collect the numeral run after 第, up to a 条 within a sane length
        std::u32string numeral;
        std::string ascii;
        std::size_t j = i + 1;
        for (; j < cps.size() && j - i <= 12; ++j) {
            const char32_t cp = cps[j].value;
            if (cp == kTiao) break;
            if (cp >= U'0' && cp <= U'9') {
                ascii.push_back(static_cast<char>(cp));
            } else if (chinese_digit(cp) || chinese_unit(cp)) {
                numeral.push_back(cp);
            } else if (is_space(cp)) {
                // allow "第 19 条" spacing
                continue;
            } else {
                j = cps.size();
                break;
            }
        }
        if (j >= cps.size() || cps[j].value != kTiao) continue;
        if (!numeral.empty() && !ascii.empty()) continue; // mixed forms rejected

        long number = 0;
        if (!ascii.empty()) {
            if (ascii.size() > 6) continue;
            number = std::stol(ascii);
        } else if (auto n = parse_chinese_numeral(numeral)) {
            number = *n;
        } else {
            continue;
        }
        if (number <= 0) continue;

        const std::size_t start = cps[i].byte_offset;
        const std::size_t end = cps[j].byte_offset + cps[j].byte_length;
        out.push_back({number, start, end - start});
        i = j;
    }
    return out;
}

std::string article_label(long number) {
    return "Article " + std::to_string(number);
}

std::optional<std::string> normalize_article_label(std::string_view label) {
    // Chinese form anywhere in the string wins.
    auto markers = find_article_markers(label);
    if (!markers.empty()) return article_label(markers.front().number);
    // Latin / bare-number forms: take the first ASCII digit run.
    std::string digits;
    for (char c : label) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
        } else if (!digits.empty()) {
            break;
        }
    }
    if (digits.empty() || digits.size() > 6) return std::nullopt;
    long n = std::stol(digits);
    if (n <= 0) return std::nullopt;
    return article_label(n);
}

std::size_t count_tokens(std::string_view s) {
    std::size_t count = 0;
    bool in_word = false;
    for (const auto& cp : decode_utf8(s)) {
        if (is_space(cp.value)) {
            in_word = false;
        } else if (is_wide(cp.value)) {
            ++count;
            in_word = false;
        } else {
            if (!in_word) ++count;
            in_word = true;
        }
    }
    return count;
}

std::vector<std::string> metric_tokens(std::string_view s) {
    const auto cps = decode_utf8(s);
    bool has_wide = false;
    bool has_space = false;
    for (const auto& cp : cps) {
        if (is_wide(cp.value)) has_wide = true;
        if (is_space(cp.value)) has_space = true;
    }
    std::vector<std::string> tokens;
    if (has_wide || !has_space) {
        // character-level; whitespace dropped
        for (const auto& cp : cps) {
            if (!is_space(cp.value)) tokens.push_back(encode_utf8(cp.value));
        }
    } else {
        std::string word;
        for (const auto& cp : cps) {
            if (is_space(cp.value)) {
                if (!word.empty()) tokens.push_back(std::move(word));
                word.clear();
            } else {
                word += std::string(s.substr(cp.byte_offset, cp.byte_length));
            }
        }
        if (!word.empty()) tokens.push_back(std::move(word));
    }
    return tokens;
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> analyze(std::string_view s, const std::vector<std::string>& lexicon) {
    std::vector<std::string> tokens;
    const auto cps = decode_utf8(s);

    std::u32string cjk_run;
    std::string ascii_run;
    auto flush_cjk = [&] {
        if (cjk_run.size() == 1) {
            tokens.push_back(encode_utf8(cjk_run[0]));
        } else {
            for (std::size_t i = 0; i + 1 < cjk_run.size(); ++i) {
                tokens.push_back(encode_utf8(cjk_run[i]) + encode_utf8(cjk_run[i + 1]));
            }
        }
        cjk_run.clear();
    };
    auto flush_ascii = [&] {
        if (!ascii_run.empty()) tokens.push_back(to_lower_ascii(ascii_run));
        ascii_run.clear();
    };

    for (const auto& cp : cps) {
        const bool alnum = cp.value < 0x80 && std::isalnum(static_cast<int>(cp.value));
        if (is_cjk(cp.value)) {
            flush_ascii();
            cjk_run.push_back(cp.value);
        } else if (alnum) {
            if (!cjk_run.empty()) flush_cjk();
            ascii_run.push_back(static_cast<char>(cp.value));
        } else {
            if (!cjk_run.empty()) flush_cjk();
            flush_ascii();
        }
    }
    if (!cjk_run.empty()) flush_cjk();
    flush_ascii();

    // Article labels as whole terms.
    for (const auto& marker : find_article_markers(s)) {
        tokens.push_back("art#" + std::to_string(marker.number));
    }
    // Lexicon terms found as substrings, each as a single whole term.
    for (const auto& term : lexicon) {
        if (!term.empty() && s.find(term) != std::string_view::npos) {
            tokens.push_back("lex#" + term);
        }
    }
    return tokens;
}

std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (const auto& cp : decode_utf8(s)) {
        if (is_space(cp.value)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out += std::string(s.substr(cp.byte_offset, cp.byte_length));
        }
    }
    return out;
}

bool is_blank(std::string_view s) {
    for (const auto& cp : decode_utf8(s)) {
        if (!is_space(cp.value)) return false;
    }
    return true;
}

} // namespace legrag::text
