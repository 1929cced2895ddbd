#pragma once

// Subcommand implementations for the pragrank tool. Each command reads its
// input files, writes exactly one output file and a `<out>.meta.json`
// sidecar, and reports failures by throwing pragrank::Error.

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pragrank::cli {

// Set by the SIGINT handler; long-running stages stop scheduling work and
// write the records completed so far.
extern std::atomic<bool> interrupted;

// Options shared by the stages that talk to a model backend.
struct BackendOptions {
    std::string backend = "toy";  // toy | http
    std::string url;              // http; defaults to PRAGRANK_BACKEND_URL
    std::string corpus;           // toy; empty uses the built-in corpus
    double toy_history_weight = 1.0;
    std::size_t toy_max_context = 0;
    std::string prompt_dir;
    std::size_t max_concurrency = 0;  // 0: PRAGRANK_MAX_CONCURRENCY or hardware threads
};

struct SourceOptions {
    std::size_t max_source_tokens = 0;  // 0 disables truncation
    std::string truncate_unit = "whitespace_token";
};

struct StatsArgs {
    std::string instances;
    std::string out;
};

struct FixtureArgs {
    std::uint64_t seed = 7;
    std::size_t n = 20;
    std::string out;
};

struct GenerateArgs {
    std::string instances;
    std::string out;
    std::string resume;
    std::size_t n = 10;
    std::string decoding = "nucleus,p=0.95";
    std::uint64_t seed = 0;
    std::uint32_t max_new_tokens = 64;
    BackendOptions backend;
    SourceOptions source;
};

struct AnswerArgs {
    std::string pools;
    std::string instances;
    std::string out;
    std::string resume;
    bool use_gold_answers = false;
    std::uint32_t beam_size = 5;
    std::uint32_t max_new_tokens = 32;
    BackendOptions backend;
    SourceOptions source;
};

struct ScoreArgs {
    std::string pools;
    std::string instances;
    std::string out;
    std::string resume;
    std::string objectives = "s0,answer,source";
    BackendOptions backend;
    SourceOptions source;
};

struct RankArgs {
    std::string pools;
    std::string instances;
    std::string out;
    std::string rule = "answer-rec";
    double lambda = 0.0;
    double alpha = 0.0;
    std::optional<std::uint64_t> seed;
    std::string oracle_metric;
    bool stem = false;
};

struct SweepArgs {
    std::string pools;
    std::string instances;
    std::string out;
    std::string lambda_grid = "0:1:0.1";
    std::string alpha_grid = "0:1:0.1";
    std::string metrics = "rouge1,rouge2,rougeL,meteor_lite";
    std::string rules;
    std::vector<std::uint64_t> seeds{0};
    bool details = false;
    bool stem = false;
    std::string select_on_split;
    std::string metric_url;
    std::string label;
    std::size_t max_concurrency = 0;
};

struct EvaluateArgs {
    std::string selections;
    std::string pools;
    std::string instances;
    std::string out;
    std::string metrics = "rouge1,rouge2,rougeL,meteor_lite";
    bool stem = false;
    std::string metric_url;
};

struct AggregateArgs {
    std::vector<std::string> reports;
    std::string table = "summary";
    std::string out;
    std::string metrics;
    bool pooled = false;
    std::string rules = "answer-rec";
    std::string quality_metrics;
    std::string text_metrics;
};

// Each returns the process exit status (0, or 130 after an interrupt).
int run_stats(const StatsArgs& args);
int run_fixture(const FixtureArgs& args);
int run_generate(const GenerateArgs& args);
int run_answer(const AnswerArgs& args);
int run_score(const ScoreArgs& args);
int run_rank(const RankArgs& args);
int run_sweep(const SweepArgs& args);
int run_evaluate(const EvaluateArgs& args);
int run_aggregate(const AggregateArgs& args);

}  // namespace pragrank::cli
