#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "legrag/corpus.hpp"
#include "legrag/errors.hpp"
#include "legrag/runner.hpp"

namespace {

using legrag::RunConfig;
using nlohmann::json;

struct CommonOpts {
    std::string config_path;
    std::optional<std::string> output_dir;
    std::optional<std::string> index_path;
    std::optional<std::string> strategy;
    std::optional<std::size_t> jobs;
    std::optional<std::size_t> top_k;
    bool no_reflection = false;
    bool no_entity_augmentation = false;
    bool error_json = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
    auto* c = cmd->add_option("-c,--config", opts.config_path, "run configuration JSON file");
    if (config_required) c->required()->check(CLI::ExistingFile);
    cmd->add_option("--output-dir", opts.output_dir, "override output directory");
    cmd->add_option("--index-path", opts.index_path, "override index file path");
    cmd->add_option("--strategy", opts.strategy,
                    "split strategy: chunk | article | chunk+article");
    cmd->add_option("--jobs", opts.jobs, "worker pool size");
    cmd->add_option("--top-k", opts.top_k, "rerank cutoff K");
    cmd->add_flag("--no-reflection", opts.no_reflection, "disable the self-reflection loop");
    cmd->add_flag("--no-entity-augmentation", opts.no_entity_augmentation,
                  "disable query entity augmentation");
    cmd->add_flag("--error-json", opts.error_json, "emit machine-readable errors on stderr");
}

RunConfig load_config(const CommonOpts& opts) {
    RunConfig cfg =
        opts.config_path.empty() ? RunConfig{} : RunConfig::from_file(opts.config_path);
    if (opts.output_dir) cfg.output_dir = *opts.output_dir;
    if (opts.index_path) cfg.index_path = *opts.index_path;
    if (opts.strategy) {
        auto s = legrag::split_strategy_from_name(*opts.strategy);
        if (!s) legrag::raise(legrag::Errc::invalid_config, "unknown strategy " + *opts.strategy);
        cfg.strategy = *s;
    }
    if (opts.jobs) cfg.jobs = std::max<std::size_t>(1, *opts.jobs);
    if (opts.top_k) cfg.retrieval.top_k = *opts.top_k;
    if (opts.no_reflection) cfg.reflection.enabled = false;
    if (opts.no_entity_augmentation) cfg.retrieval.entity_augmentation = false;
    return cfg;
}

int run_guarded(const CommonOpts& opts, const std::function<json()>& body) {
    try {
        const json report = body();
        std::fputs(legrag::render_report_text(report).c_str(), stdout);
        return 0;
    } catch (const legrag::Error& e) {
        if (opts.error_json) {
            const json err{
                {"error", {{"code", legrag::errc_name(e.code())}, {"message", e.what()}}}};
            std::fprintf(stderr, "%s\n", err.dump().c_str());
        } else {
            std::fprintf(stderr, "error: %s\n", e.what());
        }
        return 1;
    } catch (const std::exception& e) {
        if (opts.error_json) {
            const json err{{"error", {{"code", "Error"}, {"message", e.what()}}}};
            std::fprintf(stderr, "%s\n", err.dump().c_str());
        } else {
            std::fprintf(stderr, "error: %s\n", e.what());
        }
        return 1;
    }
}

int run_report(const std::vector<std::string>& run_dirs,
               const std::optional<std::string>& stats_dataset) {
    try {
        if (stats_dataset) {
            const auto entries = legrag::load_qa_dataset(*stats_dataset);
            const auto stats = legrag::dataset_stats(entries);
            std::printf("entries: %zu\n", stats.entry_count);
            for (std::size_t i = 0; i < stats.type_counts.size(); ++i) {
                std::printf("  %-8s %6zu  (%.2f%%)\n",
                            legrag::question_type_name(stats.type_counts[i].first),
                            stats.type_counts[i].second,
                            stats.type_fractions[i].second * 100.0);
            }
            auto line = [](const char* name, const legrag::TokenLengthStats& s) {
                std::printf("  %-9s min %zu  max %zu  mean %.2f\n", name, s.min, s.max, s.mean);
            };
            line("question", stats.question);
            line("answer", stats.answer);
            line("reference", stats.reference);
        }
        std::vector<json> reports;
        for (const auto& dir : run_dirs) {
            std::ifstream in(std::filesystem::path(dir) / "report.json");
            if (!in) {
                std::fprintf(stderr, "error: no report.json under %s\n", dir.c_str());
                return 1;
            }
            reports.push_back(json::parse(in));
        }
        if (reports.size() == 1) {
            std::fputs(legrag::render_report_text(reports[0]).c_str(), stdout);
        } else if (reports.size() > 1) {
            std::fputs(legrag::render_comparison_text(reports).c_str(), stdout);
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"legrag: hybrid retrieval + generation benchmark harness for statutory "
                 "document consultation"};
    app.require_subcommand(1);

    CommonOpts index_opts;
    auto* cmd_index = app.add_subcommand("index", "split the corpus and build the hybrid index");
    add_common(cmd_index, index_opts);

    CommonOpts evr_opts;
    auto* cmd_evr =
        app.add_subcommand("eval-retrieval", "run retrieval over the QA set and report metrics");
    add_common(cmd_evr, evr_opts);

    CommonOpts evg_opts;
    auto* cmd_evg = app.add_subcommand("eval-generation",
                                       "run the full pipeline and report generation metrics");
    add_common(cmd_evg, evg_opts);

    CommonOpts judge_opts;
    std::optional<std::string> answers_dir;
    std::optional<std::string> human_csv;
    auto* cmd_judge = app.add_subcommand("judge", "score a generation run with the judge model");
    add_common(cmd_judge, judge_opts);
    cmd_judge->add_option("--answers", answers_dir,
                          "generation run directory holding answers.jsonl");
    cmd_judge->add_option("--human-scores", human_csv,
                          "CSV of entry_id,score expert ratings for the credibility check");

    CommonOpts cal_opts;
    std::string labeled_path;
    auto* cmd_cal =
        app.add_subcommand("calibrate", "fit the accuracy threshold from labeled ROUGE scores");
    add_common(cmd_cal, cal_opts);
    cmd_cal->add_option("scores", labeled_path, "CSV of score,correct (or entry_id,score,correct)")
        ->required()
        ->check(CLI::ExistingFile);

    CommonOpts ask_opts;
    std::string question;
    bool verbose = false;
    auto* cmd_ask = app.add_subcommand("ask", "answer one question against the index");
    add_common(cmd_ask, ask_opts);
    cmd_ask->add_option("question", question, "the question text")->required();
    cmd_ask->add_flag("-v,--verbose", verbose, "print stage-1 candidates and reflection rounds");

    CommonOpts sweep_opts;
    auto* cmd_sweep = app.add_subcommand(
        "sweep", "run the strategy x augmentation x reflection ablation matrix");
    add_common(cmd_sweep, sweep_opts);

    CommonOpts report_opts;
    std::vector<std::string> run_dirs;
    std::optional<std::string> stats_dataset;
    auto* cmd_report = app.add_subcommand("report", "re-render stored reports");
    add_common(cmd_report, report_opts, /*config_required=*/false);
    cmd_report->add_option("runs", run_dirs, "run directories holding report.json");
    cmd_report->add_option("--dataset", stats_dataset,
                           "print dataset statistics for a QA JSONL file");

    CLI11_PARSE(app, argc, argv);

    if (cmd_index->parsed()) {
        return run_guarded(index_opts,
                           [&] { return legrag::Runner(load_config(index_opts)).cmd_index(); });
    }
    if (cmd_evr->parsed()) {
        return run_guarded(
            evr_opts, [&] { return legrag::Runner(load_config(evr_opts)).cmd_eval_retrieval(); });
    }
    if (cmd_evg->parsed()) {
        return run_guarded(evg_opts, [&] {
            return legrag::Runner(load_config(evg_opts)).cmd_eval_generation();
        });
    }
    if (cmd_judge->parsed()) {
        return run_guarded(judge_opts, [&] {
            return legrag::Runner(load_config(judge_opts)).cmd_judge(answers_dir, human_csv);
        });
    }
    if (cmd_cal->parsed()) {
        return run_guarded(cal_opts, [&] {
            return legrag::Runner(load_config(cal_opts)).cmd_calibrate(labeled_path);
        });
    }
    if (cmd_ask->parsed()) {
        return run_guarded(ask_opts, [&] {
            return legrag::Runner(load_config(ask_opts))
                .cmd_ask(question, ask_opts.no_reflection, verbose);
        });
    }
    if (cmd_sweep->parsed()) {
        return run_guarded(sweep_opts,
                           [&] { return legrag::Runner(load_config(sweep_opts)).cmd_sweep(); });
    }
    if (cmd_report->parsed()) {
        return run_report(run_dirs, stats_dataset);
    }
    return 0;
}
