#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "legrag/corpus.hpp"
#include "legrag/errors.hpp"
#include "helpers.hpp"

using namespace legrag;

namespace {

std::string corpus_two_docs() {
    return R"({"doc_id":"d1","title":"条例甲","body":"第一条 内容。","domain_tag":"market"}
{"doc_id":"d2","title":"条例乙","body":"第一条 其他内容。"}
)";
}

} // namespace

TEST_CASE("load_corpus: two valid records round-trip") {
    std::istringstream in(corpus_two_docs());
    const auto docs = load_corpus(in, "mem");
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "d1");
    CHECK(docs[0].domain_tag == "market");
    CHECK(docs[1].doc_id == "d2");
    CHECK_FALSE(docs[1].domain_tag.has_value());

    std::ostringstream out;
    save_corpus(docs, out);
    std::istringstream in2(out.str());
    const auto again = load_corpus(in2, "mem2");
    REQUIRE(again.size() == 2);
    CHECK(again[0].body == docs[0].body);
    CHECK(again[1].title == docs[1].title);
}

TEST_CASE("load_corpus: duplicate doc_id rejected") {
    std::istringstream in(R"({"doc_id":"d1","body":"x"}
{"doc_id":"d1","body":"y"}
)");
    CHECK_THROWS_WITH_AS(load_corpus(in, "mem"), doctest::Contains("duplicate doc_id"), Error);
    std::istringstream in2(R"({"doc_id":"d1","body":"x"}
{"doc_id":"d1","body":"y"}
)");
    try {
        load_corpus(in2, "mem");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::duplicate_doc_id);
    }
}

TEST_CASE("load_corpus: malformed line carries the line number") {
    std::istringstream in("{\"doc_id\":\"d1\",\"body\":\"x\"}\nnot json\n");
    try {
        load_corpus(in, "mem");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::malformed_record);
        CHECK(std::string(e.what()).find("mem:2") != std::string::npos);
    }
}

TEST_CASE("load_qa_dataset: one valid five-tuple line") {
    std::istringstream corpus_in(corpus_two_docs());
    const auto corpus = load_corpus(corpus_in, "mem");
    std::istringstream in(
        R"({"entry_id":"q1","doc_id":"d1","question":"什么是内容？","answer":"内容。","question_type":"concept","references":[{"doc_id":"d1","article_label":"第一条","key_text":"内容"}]}
)");
    const auto entries = load_qa_dataset(in, "mem", &corpus);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].entry_id == "q1");
    CHECK(entries[0].question_type == QuestionType::ConceptExplanation);
    REQUIRE(entries[0].references.size() == 1);
    CHECK(entries[0].references[0].article_label == "Article 1"); // normalized
    CHECK(entries[0].references[0].key_text == "内容");
}

TEST_CASE("load_qa_dataset: schema violations") {
    std::istringstream corpus_in(corpus_two_docs());
    const auto corpus = load_corpus(corpus_in, "mem");

    SUBCASE("missing references") {
        std::istringstream in(
            R"({"entry_id":"q1","doc_id":"d1","question":"q","answer":"a","question_type":"concept"}
)");
        try {
            load_qa_dataset(in, "mem", &corpus);
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::malformed_record);
        }
    }
    SUBCASE("unknown question type") {
        std::istringstream in(
            R"({"entry_id":"q1","doc_id":"d1","question":"q","answer":"a","question_type":"riddle","references":[{"doc_id":"d1","key_text":"x"}]}
)");
        try {
            load_qa_dataset(in, "mem", &corpus);
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::unknown_question_type);
        }
    }
    SUBCASE("dangling doc reference") {
        std::istringstream in(
            R"({"entry_id":"q1","doc_id":"d9","question":"q","answer":"a","question_type":"other","references":[{"doc_id":"d9","key_text":"x"}]}
)");
        try {
            load_qa_dataset(in, "mem", &corpus);
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::dangling_doc_reference);
        }
    }
    SUBCASE("reference with neither anchor") {
        std::istringstream in(
            R"({"entry_id":"q1","doc_id":"d1","question":"q","answer":"a","question_type":"other","references":[{"doc_id":"d1"}]}
)");
        CHECK_THROWS_AS(load_qa_dataset(in, "mem", &corpus), Error);
    }
}

TEST_CASE("qa dataset save/load identity") {
    const auto synth = testing::make_statutes(3, 4);
    std::ostringstream out;
    save_qa_dataset(synth.entries, out);
    std::istringstream in(out.str());
    const auto again = load_qa_dataset(in, "mem", &synth.docs);
    REQUIRE(again.size() == synth.entries.size());
    for (std::size_t i = 0; i < again.size(); ++i) {
        CHECK(again[i].entry_id == synth.entries[i].entry_id);
        CHECK(again[i].question == synth.entries[i].question);
        CHECK(again[i].gold_answer == synth.entries[i].gold_answer);
        CHECK(again[i].question_type == synth.entries[i].question_type);
        REQUIRE(again[i].references.size() == synth.entries[i].references.size());
        CHECK(again[i].references[0].article_label == synth.entries[i].references[0].article_label);
    }
}

TEST_CASE("dataset_stats") {
    auto entry = [](const char* id, std::size_t q_tokens) {
        QAEntry e;
        e.entry_id = id;
        e.doc_id = "d";
        e.question = std::string(q_tokens, 'x'); // counted below with a char counter
        e.gold_answer = "a";
        e.question_type = QuestionType::SummaryInduction;
        e.references.push_back({"d", std::string("Article 1"), std::nullopt});
        return e;
    };
    // token counter that counts bytes, making expected values explicit
    const auto char_counter = [](std::string_view s) { return s.size(); };

    SUBCASE("min/max/mean arithmetic") {
        std::vector<QAEntry> entries{entry("a", 6), entry("b", 21), entry("c", 79)};
        const auto stats = dataset_stats(entries, char_counter);
        CHECK(stats.question.min == 6);
        CHECK(stats.question.max == 79);
        CHECK(stats.question.mean == doctest::Approx((6.0 + 21.0 + 79.0) / 3.0));
    }
    SUBCASE("single entry degenerate") {
        std::vector<QAEntry> entries{entry("a", 10)};
        const auto stats = dataset_stats(entries, char_counter);
        CHECK(stats.question.min == 10);
        CHECK(stats.question.max == 10);
        CHECK(stats.question.mean == doctest::Approx(10.0));
    }
    SUBCASE("empty dataset rejected") {
        std::vector<QAEntry> none;
        try {
            dataset_stats(none, char_counter);
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::empty_dataset);
        }
    }
    SUBCASE("fractions sum to one and permutation invariance") {
        auto synth = testing::make_statutes(4, 5);
        const auto stats = dataset_stats(synth.entries);
        double total = 0.0;
        for (const auto& [_, f] : stats.type_fractions) total += f;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(stats.question.min <= stats.question.mean);
        CHECK(stats.question.mean <= static_cast<double>(stats.question.max));

        std::mt19937 rng(7);
        std::shuffle(synth.entries.begin(), synth.entries.end(), rng);
        const auto shuffled = dataset_stats(synth.entries);
        CHECK(shuffled.question.mean == stats.question.mean);
        CHECK(shuffled.answer.max == stats.answer.max);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(shuffled.type_counts[i].second == stats.type_counts[i].second);
        }
    }
}
