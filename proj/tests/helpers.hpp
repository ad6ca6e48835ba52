#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "legrag/corpus.hpp"
#include "legrag/splitter.hpp"

namespace legrag::testing {

/// Deterministic synthetic statute corpus. Each article gets a distinct
/// subject/action sentence so lexical and vector signatures differ.
struct SyntheticCorpus {
    std::vector<LegalDocument> docs;
    std::vector<QAEntry> entries; // question == verbatim article text
};

inline const std::vector<std::string>& legal_terms() {
    static const std::vector<std::string> terms = {
        "经营者",   "监督管理部门", "食品",     "无人驾驶航空器", "合同",
        "登记",     "许可",         "备案",     "处罚",           "罚款",
        "注册资本", "投资",         "信息",     "公示",           "申请",
        "审批",     "安全",         "检验",     "抽样",           "市场",
        "主体",     "实名",         "化学品",   "进口",           "出口",
        "质量",     "标准",         "召回",     "广告",           "商标",
        "专利",     "担保",         "抵押",     "仲裁",           "诉讼",
        "赔偿",     "责任",         "期限",     "变更",           "注销"};
    return terms;
}

inline std::string chinese_ordinal(int n) {
    static const char* digits[] = {"零", "一", "二", "三", "四", "五", "六", "七", "八", "九"};
    std::string out;
    if (n >= 100) {
        out += digits[n / 100];
        out += "百";
        n %= 100;
        if (n > 0 && n < 10) out += "零";
    }
    if (n >= 10) {
        if (n >= 20) out += digits[n / 10];
        out += "十";
        n %= 10;
    }
    if (n > 0) out += digits[n];
    return out;
}

inline std::string article_sentence(int doc_idx, int article_no, std::mt19937& rng) {
    const auto& terms = legal_terms();
    std::uniform_int_distribution<std::size_t> pick(0, terms.size() - 1);
    std::string body = "第" + chinese_ordinal(article_no) + "条 ";
    body += terms[pick(rng)] + "应当向" + terms[pick(rng)] + "办理" + terms[pick(rng)] +
            "，并对" + terms[pick(rng)] + "承担" + terms[pick(rng)] + "。";
    body += "违反规定的，由" + terms[pick(rng)] + "责令改正，处第" +
            std::to_string(doc_idx + 1) + "类" + terms[pick(rng)] + "。";
    return body;
}

inline SyntheticCorpus make_statutes(int n_docs, int articles_per_doc, unsigned seed = 42) {
    std::mt19937 rng(seed);
    SyntheticCorpus out;
    for (int d = 0; d < n_docs; ++d) {
        LegalDocument doc;
        doc.doc_id = "doc-" + std::to_string(d);
        doc.title = "测试条例" + std::to_string(d);
        for (int a = 1; a <= articles_per_doc; ++a) {
            const std::string art = article_sentence(d, a, rng);
            const std::size_t start = doc.body.size();
            doc.body += art;
            QAEntry e;
            e.entry_id = doc.doc_id + "-q" + std::to_string(a);
            e.doc_id = doc.doc_id;
            e.question = art;
            e.gold_answer = art;
            e.question_type = static_cast<QuestionType>((d + a) % 4);
            ReferenceSpan ref;
            ref.doc_id = doc.doc_id;
            ref.article_label = "Article " + std::to_string(a);
            ref.key_text = doc.body.substr(start);
            out.entries.push_back(std::move(e));
        }
        out.docs.push_back(std::move(doc));
    }
    return out;
}

/// Unique temp directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& stem) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                (stem + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

} // namespace legrag::testing
