#include <doctest.h>

#include "legrag/text.hpp"

using namespace legrag::text;

TEST_CASE("utf8 decode round-trips code points") {
    const std::string s = "第19条 Article 19。ab";
    const auto cps = decode_utf8(s);
    std::string rebuilt;
    for (const auto& cp : cps) rebuilt += encode_utf8(cp.value);
    CHECK(rebuilt == s);
    std::size_t total = 0;
    for (const auto& cp : cps) total += cp.byte_length;
    CHECK(total == s.size());
}

TEST_CASE("chinese numerals") {
    auto parse = [](const char* s) {
        const auto cps = decode_utf8(s);
        std::u32string u;
        for (const auto& cp : cps) u.push_back(cp.value);
        return parse_chinese_numeral(u);
    };
    CHECK(parse("一") == 1);
    CHECK(parse("十") == 10);
    CHECK(parse("十九") == 19);
    CHECK(parse("二十") == 20);
    CHECK(parse("二十一") == 21);
    CHECK(parse("一百") == 100);
    CHECK(parse("一百零三") == 103);
    CHECK(parse("一百二十三") == 123);
    CHECK(parse("一千零一十") == 1010);
    CHECK_FALSE(parse("").has_value());
    CHECK_FALSE(parse("二三").has_value());
    CHECK_FALSE(parse("零").has_value());
}

TEST_CASE("article markers") {
    const std::string body = "第一条 甲。第二条 乙。";
    const auto markers = find_article_markers(body);
    REQUIRE(markers.size() == 2);
    CHECK(markers[0].number == 1);
    CHECK(markers[1].number == 2);
    CHECK(markers[0].byte_offset == 0);
    CHECK(body.substr(markers[1].byte_offset, markers[1].byte_length) == "第二条");

    CHECK(find_article_markers("没有条款标记的文本。").empty());
    // ascii digits and internal spacing both parse
    const auto ascii = find_article_markers("第19条 内容。第 20 条 其他。");
    REQUIRE(ascii.size() == 2);
    CHECK(ascii[0].number == 19);
    CHECK(ascii[1].number == 20);
}

TEST_CASE("article label normalization") {
    CHECK(normalize_article_label("第十九条") == "Article 19");
    CHECK(normalize_article_label("第19条") == "Article 19");
    CHECK(normalize_article_label("Article 19") == "Article 19");
    CHECK(normalize_article_label("article 7") == "Article 7");
    CHECK(normalize_article_label("19") == "Article 19");
    CHECK_FALSE(normalize_article_label("no digits here").has_value());
    CHECK_FALSE(normalize_article_label("").has_value());
}

TEST_CASE("token counting: wide chars count singly, ascii words by whitespace") {
    CHECK(count_tokens("") == 0);
    CHECK(count_tokens("hello world") == 2);
    CHECK(count_tokens("法律文本") == 4);
    CHECK(count_tokens("第19条 hello") == 4); // 第 + 19 + 条 + hello
    CHECK(count_tokens("   ") == 0);
}

TEST_CASE("metric tokens: character-level for CJK or unspaced text") {
    CHECK(metric_tokens("abcde").size() == 5);
    CHECK(metric_tokens("the cat").size() == 2);
    CHECK(metric_tokens("法律 text").size() == 2 + 5); // CJK present -> per char
    CHECK(metric_tokens("").empty());
}

TEST_CASE("lexical analyzer") {
    SUBCASE("cjk bigrams") {
        const auto tokens = analyze("食品安全");
        // 3 bigrams
        CHECK(std::count(tokens.begin(), tokens.end(), "食品") == 1);
        CHECK(std::count(tokens.begin(), tokens.end(), "品安") == 1);
        CHECK(std::count(tokens.begin(), tokens.end(), "安全") == 1);
    }
    SUBCASE("single cjk char becomes unigram") {
        const auto tokens = analyze("法");
        CHECK(tokens == std::vector<std::string>{"法"});
    }
    SUBCASE("ascii lowercased") {
        const auto tokens = analyze("Hello WORLD");
        CHECK(std::count(tokens.begin(), tokens.end(), "hello") == 1);
        CHECK(std::count(tokens.begin(), tokens.end(), "world") == 1);
    }
    SUBCASE("article labels become whole terms") {
        const auto tokens = analyze("依照第十九条处理");
        CHECK(std::count(tokens.begin(), tokens.end(), "art#19") == 1);
    }
    SUBCASE("lexicon terms become whole terms") {
        const auto tokens = analyze("购买无人机需要实名登记", {"实名登记", "食品"});
        CHECK(std::count(tokens.begin(), tokens.end(), "lex#实名登记") == 1);
        CHECK(std::count(tokens.begin(), tokens.end(), "lex#食品") == 0);
    }
}

TEST_CASE("normalize_whitespace and is_blank") {
    CHECK(normalize_whitespace("  a \n b  ") == "a b");
    CHECK(is_blank(" \t\n"));
    CHECK(is_blank("　")); // fullwidth space
    CHECK_FALSE(is_blank(" x "));
}
