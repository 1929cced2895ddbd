#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "json_util.hpp"
#include "pragrank/error.hpp"
#include "pragrank/version.hpp"

namespace {

using namespace pragrank::cli;

void on_sigint(int) { interrupted.store(true); }

std::string_view category_name(pragrank::ErrorCategory c) {
    switch (c) {
        case pragrank::ErrorCategory::Schema: return "schema";
        case pragrank::ErrorCategory::Backend: return "backend";
        case pragrank::ErrorCategory::Precondition: return "precondition";
    }
    return "unknown";
}

void print_error(std::string_view code, std::string_view category, const std::string& message,
                 const std::string& file = {}, std::optional<std::size_t> line = std::nullopt) {
    pragrank::detail::Json j = pragrank::detail::Json::object();
    j["error"] = std::string(code);
    j["category"] = std::string(category);
    j["message"] = message;
    if (!file.empty()) j["file"] = file;
    if (line) j["line"] = *line;
    std::cerr << pragrank::detail::dump_canonical(j) << "\n";
}

void add_backend(CLI::App* app, BackendOptions& o) {
    app->add_option("--backend", o.backend, "Model backend: toy or http")
        ->capture_default_str();
    app->add_option("--url", o.url, "Backend base URL (default: $PRAGRANK_BACKEND_URL)");
    app->add_option("--corpus", o.corpus, "Toy LM training corpus (default: built-in)");
    app->add_option("--toy-history-weight", o.toy_history_weight,
                    "Toy LM weight of in-prompt bigram counts")
        ->capture_default_str();
    app->add_option("--toy-max-context", o.toy_max_context,
                    "Toy LM prompt limit in bytes, 0 for none")
        ->capture_default_str();
    app->add_option("--prompt-dir", o.prompt_dir, "Directory overriding the prompt templates");
    app->add_option("--max-concurrency", o.max_concurrency,
                    "Parallel requests, 0 for $PRAGRANK_MAX_CONCURRENCY or all cores")
        ->capture_default_str();
}

void add_source(CLI::App* app, SourceOptions& o) {
    app->add_option("--max-source-tokens", o.max_source_tokens,
                    "Truncate sources to this many units, 0 for none")
        ->capture_default_str();
    app->add_option("--truncate-unit", o.truncate_unit, "Truncation unit: whitespace_token or byte")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pragrank: pragmatic re-ranking of query-focused summaries", "pragrank"};
    app.set_version_flag("--version", std::string(pragrank::version()));
    app.require_subcommand(1);

    StatsArgs stats;
    auto* c_stats = app.add_subcommand("stats", "Dataset statistics of an instances file");
    c_stats->add_option("--instances", stats.instances, "Instances JSONL")->required();
    c_stats->add_option("--out", stats.out, "Output JSON")->required();

    FixtureArgs fixture;
    auto* c_fixture = app.add_subcommand("fixture", "Write a synthetic instances file");
    c_fixture->add_option("--seed", fixture.seed, "Fixture seed")->capture_default_str();
    c_fixture->add_option("--n", fixture.n, "Number of instances")->capture_default_str();
    c_fixture->add_option("--out", fixture.out, "Output JSONL")->required();

    GenerateArgs gen;
    auto* c_gen = app.add_subcommand("generate", "Sample candidate summaries for each instance");
    c_gen->add_option("--instances", gen.instances, "Instances JSONL")->required();
    c_gen->add_option("--out", gen.out, "Output pools JSONL")->required();
    c_gen->add_option("--n", gen.n, "Candidates per instance")->capture_default_str();
    c_gen->add_option("--decoding", gen.decoding,
                      "Decoding spec, e.g. nucleus,p=0.95,temp=1.5 or beam,beam_size=5")
        ->capture_default_str();
    c_gen->add_option("--seed", gen.seed, "Sampling seed")->capture_default_str();
    c_gen->add_option("--max-new-tokens", gen.max_new_tokens, "Generation length limit")
        ->capture_default_str();
    c_gen->add_option("--resume", gen.resume, "Partial pools file whose records are reused");
    add_backend(c_gen, gen.backend);
    add_source(c_gen, gen.source);

    AnswerArgs ans;
    auto* c_ans = app.add_subcommand("answer", "Attach the reference answer a = F(x, q) to each pool");
    c_ans->add_option("--pools", ans.pools, "Pools JSONL")->required();
    c_ans->add_option("--instances", ans.instances, "Instances JSONL")->required();
    c_ans->add_option("--out", ans.out, "Output pools JSONL")->required();
    c_ans->add_flag("--use-gold-answers", ans.use_gold_answers,
                    "Copy gold_answer from the instance when present");
    c_ans->add_option("--beam-size", ans.beam_size, "Answer beam size")->capture_default_str();
    c_ans->add_option("--max-new-tokens", ans.max_new_tokens, "Answer length limit")
        ->capture_default_str();
    c_ans->add_option("--resume", ans.resume, "Partial pools file whose answers are reused");
    add_backend(c_ans, ans.backend);
    add_source(c_ans, ans.source);

    ScoreArgs score;
    auto* c_score = app.add_subcommand("score", "Score candidates under the literal and reader models");
    c_score->add_option("--pools", score.pools, "Pools JSONL")->required();
    c_score->add_option("--instances", score.instances, "Instances JSONL")->required();
    c_score->add_option("--out", score.out, "Output pools JSONL")->required();
    c_score->add_option("--objectives", score.objectives,
                        "Comma list of s0, answer, source, latent")
        ->capture_default_str();
    c_score->add_option("--resume", score.resume, "Partial pools file whose scores are reused");
    add_backend(c_score, score.backend);
    add_source(c_score, score.source);

    RankArgs rank;
    auto* c_rank = app.add_subcommand("rank", "Select one candidate per pool with a single rule");
    c_rank->add_option("--pools", rank.pools, "Scored pools JSONL")->required();
    c_rank->add_option("--instances", rank.instances, "Instances JSONL (oracle only)");
    c_rank->add_option("--out", rank.out, "Output selections JSONL")->required();
    c_rank->add_option("--rule", rank.rule,
                       "answer-rec, source-rec, ans-src-rec, latent-rec, random or oracle")
        ->capture_default_str();
    c_rank->add_option("--lambda", rank.lambda, "Reader weight in [0, 1]")->capture_default_str();
    c_rank->add_option("--alpha", rank.alpha, "Source share of the reader term (ans-src-rec)")
        ->capture_default_str();
    c_rank->add_option("--seed", rank.seed, "Seed for the random rule (default 0)");
    c_rank->add_option("--oracle-metric", rank.oracle_metric, "Metric for the oracle rule (default rouge1)");
    c_rank->add_flag("--stem", rank.stem, "Porter-stem tokens before matching");

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("sweep", "Evaluate every selector over the lambda/alpha grid");
    c_sweep->add_option("--pools", sweep.pools, "Scored pools JSONL")->required();
    c_sweep->add_option("--instances", sweep.instances, "Instances JSONL")->required();
    c_sweep->add_option("--out", sweep.out, "Output report JSON")->required();
    c_sweep->add_option("--lambda-grid", sweep.lambda_grid, "Comma list or start:stop:step")
        ->capture_default_str();
    c_sweep->add_option("--alpha-grid", sweep.alpha_grid, "Comma list or start:stop:step")
        ->capture_default_str();
    c_sweep->add_option("--metrics", sweep.metrics,
                        "Comma list of rouge1, rouge2, rougeL, meteor_lite, ext:<name>")
        ->capture_default_str();
    c_sweep->add_option("--rules", sweep.rules,
                        "Comma list of rules (default: all available)");
    c_sweep->add_option("--seeds", sweep.seeds, "Seeds averaged by the random rule (comma list)")
        ->delimiter(',')
        ->capture_default_str();
    c_sweep->add_flag("--details", sweep.details, "Include per-instance values");
    c_sweep->add_flag("--stem", sweep.stem, "Porter-stem tokens before matching");
    c_sweep->add_option("--select-on-split", sweep.select_on_split,
                        "File of instance ids used to pick lambda*/alpha*");
    c_sweep->add_option("--metric-url", sweep.metric_url,
                        "External metric server (default: $PRAGRANK_BACKEND_URL)");
    c_sweep->add_option("--label", sweep.label, "Report label (default: output file stem)");
    c_sweep->add_option("--max-concurrency", sweep.max_concurrency,
                        "Worker threads, 0 for $PRAGRANK_MAX_CONCURRENCY or all cores")
        ->capture_default_str();

    EvaluateArgs eval;
    auto* c_eval = app.add_subcommand("evaluate", "Score selected candidates against references");
    c_eval->add_option("--selections", eval.selections, "Selections JSONL")->required();
    c_eval->add_option("--pools", eval.pools, "Pools JSONL")->required();
    c_eval->add_option("--instances", eval.instances, "Instances JSONL")->required();
    c_eval->add_option("--out", eval.out, "Output JSON")->required();
    c_eval->add_option("--metrics", eval.metrics, "Comma list of metrics")->capture_default_str();
    c_eval->add_flag("--stem", eval.stem, "Porter-stem tokens before matching");
    c_eval->add_option("--metric-url", eval.metric_url,
                       "External metric server (default: $PRAGRANK_BACKEND_URL)");

    AggregateArgs agg;
    auto* c_agg = app.add_subcommand("aggregate", "Build comparison tables from sweep reports");
    c_agg->add_option("--reports", agg.reports, "Sweep report JSON files")
        ->delimiter(',')
        ->required();
    c_agg->add_option("--table", agg.table,
                      "summary, top-frequency, relative-change or tradeoff")
        ->capture_default_str();
    c_agg->add_option("--out", agg.out, "Output CSV")->required();
    c_agg->add_option("--metrics", agg.metrics, "Comma list of metrics (default: all shared)");
    c_agg->add_flag("--pooled", agg.pooled,
                    "Relative change of pooled means instead of the mean of per-report changes");
    c_agg->add_option("--rules", agg.rules, "Rules plotted by the tradeoff table")
        ->capture_default_str();
    c_agg->add_option("--quality-metrics", agg.quality_metrics,
                      "Tradeoff quality family (default: native metrics in the report)");
    c_agg->add_option("--text-metrics", agg.text_metrics, "Tradeoff text-quality family");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("UsageError", "precondition", e.what());
        return 4;
    }

    std::signal(SIGINT, on_sigint);
    try {
        if (*c_stats) return run_stats(stats);
        if (*c_fixture) return run_fixture(fixture);
        if (*c_gen) return run_generate(gen);
        if (*c_ans) return run_answer(ans);
        if (*c_score) return run_score(score);
        if (*c_rank) return run_rank(rank);
        if (*c_sweep) return run_sweep(sweep);
        if (*c_eval) return run_evaluate(eval);
        if (*c_agg) return run_aggregate(agg);
    } catch (const pragrank::Error& e) {
        print_error(pragrank::to_string(e.code()), category_name(e.category()), e.what(), e.file(),
                    e.line());
        return pragrank::exit_code_of(e.code());
    } catch (const std::exception& e) {
        print_error("InternalError", "internal", e.what());
        return 1;
    }
    return 0;
}
