#pragma once

// Parameter sweeps over scored candidate pools and the derived comparison
// tables.
//
// A sweep evaluates every selector point (rule, lambda, alpha) on every pool,
// scores the chosen candidate with each metric against the instance's
// references (multi-reference max) and averages over instances. Grid points
// are visited in ascending order; lambda*/alpha* for a (rule, metric) pair is
// the grid argmax of the mean, ties to the smallest lambda and then the
// smallest alpha.
//
// CSV layouts
//   summary:          report,selector,<m>,<m>_lambda,<m>_alpha for each metric m
//   top-frequency:    selector,<m> for each metric m, then reports
//   relative-change:  selector,<m> for each metric m (percent, or "undefined")
//   tradeoff:         rule,lambda,metric,value

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pragrank/metrics.hpp"
#include "pragrank/types.hpp"

namespace pragrank {

// {0.0, 0.1, ..., 1.0}, each value i / 10.0.
std::vector<double> default_grid();

// "0,0.25,1" or "start:stop:step" (inclusive). Values must lie in [0, 1].
// Throws GridEmpty, LambdaOutOfRange / InvalidArgument.
std::vector<double> parse_grid(std::string_view text);

// Per-candidate metric value: (metric, instance, candidate text) -> score.
using MetricEvaluator =
    std::function<double(const MetricId&, const Instance&, std::string_view candidate)>;

struct SweepOptions {
    std::vector<double> lambda_grid = default_grid();
    std::vector<double> alpha_grid = default_grid();
    std::vector<MetricId> metrics;
    // Empty selects answer-rec, source-rec, ans-src-rec, random, oracle, and
    // latent-rec when every candidate carries a latent score.
    std::vector<Rule> rules;
    std::vector<std::uint64_t> seeds{0};  // Random is averaged over these
    bool details = false;
    std::size_t workers = 1;
    // When set, lambda*/alpha* are chosen on these instances and every cell
    // is averaged over the remaining ones.
    std::optional<std::set<std::string>> selection_ids;
    MetricEvaluator evaluator;  // defaults to the native multi-reference metrics
    TokenizerOptions tokenizer;
    std::string backend;        // echoed into metadata
    std::string decoding;       // echoed into metadata
    std::string label;
};

struct SweepMetadata {
    std::string tool_version;
    std::string prng;
    std::string label;
    std::string backend;
    std::string decoding;
    std::vector<std::uint64_t> seeds;
    std::vector<double> lambda_grid;
    std::vector<double> alpha_grid;
    std::vector<std::string> metrics;
    std::vector<std::string> rules;
    std::size_t instances = 0;            // pools evaluated
    std::size_t selection_instances = 0;  // 0 unless a selection split was given
    bool stemming = false;

    bool operator==(const SweepMetadata&) const = default;
};

struct SweepCell {
    Rule rule = Rule::AnswerRec;
    std::optional<double> lambda;  // absent for Random and Oracle
    std::optional<double> alpha;   // AnsSrcRec only
    std::string metric;
    double mean = 0.0;
    std::size_t count = 0;

    bool operator==(const SweepCell&) const = default;
};

struct SweepOptimum {
    Rule rule = Rule::AnswerRec;
    std::string metric;
    double lambda = 0.0;
    std::optional<double> alpha;
    double value = 0.0;                      // cell mean at the optimum
    std::optional<double> selection_value;   // mean on the selection split, if any

    bool operator==(const SweepOptimum&) const = default;
};

struct InstanceDetail {
    std::string instance_id;
    bool selection = false;                        // member of the selection split
    std::vector<double> values;                    // aligned with SweepReport::cells
    std::vector<std::vector<std::size_t>> chosen;  // aligned with cells; one per seed for Random

    bool operator==(const InstanceDetail&) const = default;
};

struct SweepReport {
    SweepMetadata metadata;
    std::vector<SweepCell> cells;
    std::vector<SweepOptimum> optima;
    std::vector<InstanceDetail> details;

    const SweepCell* find(Rule rule, std::optional<double> lambda, std::optional<double> alpha,
                          std::string_view metric) const;
    const SweepOptimum* optimum(Rule rule, std::string_view metric) const;

    bool operator==(const SweepReport&) const = default;
};

// Pools are matched to instances by id. Throws MissingScore, GridEmpty,
// EmptyReferences, InvalidArgument (unknown instance, empty metric list,
// external metric without an evaluator).
SweepReport run_sweep(std::span<const Instance> instances, std::span<const CandidatePool> pools,
                      const SweepOptions& options);

std::string report_to_json(const SweepReport& report);
SweepReport report_from_json(std::string_view json);

// Compensated (Neumaier) sum.
double neumaier_sum(std::span<const double> values);

// ---- tables ---------------------------------------------------------------

// Row labels in table order.
inline constexpr std::string_view kRowRandom = "random";
inline constexpr std::string_view kRowLiteral = "literal";               // answer-rec, lambda = 0
inline constexpr std::string_view kRowAnswerReader = "answer-rec@1";     // lambda = 1
inline constexpr std::string_view kRowSourceReader = "source-rec@1";     // lambda = 1
inline constexpr std::string_view kRowAnswerOpt = "answer-rec@opt";
inline constexpr std::string_view kRowSourceOpt = "source-rec@opt";
inline constexpr std::string_view kRowAnsSrcOpt = "ans-src-rec@opt";
inline constexpr std::string_view kRowLatentOpt = "latent-rec@opt";
inline constexpr std::string_view kRowOracle = "oracle";

struct SummaryEntry {
    double value = 0.0;
    std::optional<double> lambda;
    std::optional<double> alpha;

    bool operator==(const SummaryEntry&) const = default;
};

struct SummaryRow {
    std::string selector;
    std::vector<std::optional<SummaryEntry>> entries;  // aligned with metrics
};

struct SummaryTable {
    std::string report;
    std::vector<std::string> metrics;
    std::vector<SummaryRow> rows;
};

// Rows whose cells are missing from the report are omitted.
SummaryTable summary_table(const SweepReport& report);

struct FrequencyTable {
    std::vector<std::string> metrics;
    std::vector<std::string> selectors;
    std::vector<std::vector<std::size_t>> counts;  // [selector][metric]
    std::size_t reports = 0;
};

// For each metric, counts the reports in which each selector attains the
// maximum mean; every tied selector is counted. Compared selectors: random,
// literal and the @opt rows (oracle and the lambda = 1 rows are excluded).
// An empty metric list uses the metrics common to all reports.
FrequencyTable top_frequency_table(std::span<const SweepReport> reports,
                                   std::span<const std::string> metrics = {});

enum class RelativeAggregation {
    MeanOfChanges,  // mean over reports of 100 (s - r) / r
    PooledMeans,    // 100 (mean s - mean r) / mean r
};

struct RelativeChangeTable {
    std::vector<std::string> metrics;
    std::vector<std::string> selectors;
    std::vector<std::vector<std::optional<double>>> percent;  // nullopt: undefined
};

// Baseline is the random row. Selectors: literal and the @opt rows. A cell
// is undefined when the random mean is 0 in any report or the selector is
// missing from one. Throws InvalidArgument when a report has no random cell.
RelativeChangeTable relative_change_table(
    std::span<const SweepReport> reports, std::span<const std::string> metrics = {},
    RelativeAggregation aggregation = RelativeAggregation::MeanOfChanges);

struct TradeoffRow {
    Rule rule = Rule::AnswerRec;
    double lambda = 0.0;
    std::string metric;
    double value = 0.0;

    bool operator==(const TradeoffRow&) const = default;
};

struct TradeoffCurves {
    std::vector<TradeoffRow> rows;
    std::vector<std::string> warnings;
};

// One row per (rule, lambda, metric) over the report's lambda grid, quality
// metrics first. ans-src-rec rows are taken at the metric's alpha*. Missing
// metrics and an empty text family produce warnings instead of rows.
TradeoffCurves tradeoff_curves(const SweepReport& report, std::span<const Rule> rules,
                               std::span<const std::string> quality_metrics,
                               std::span<const std::string> text_metrics);

std::string to_csv(const SummaryTable& table);
std::string to_csv(std::span<const SummaryTable> tables);
std::string to_csv(const FrequencyTable& table);
std::string to_csv(const RelativeChangeTable& table);
std::string to_csv(const TradeoffCurves& curves);

}  // namespace pragrank
