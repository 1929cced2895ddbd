#include "pragrank/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <unordered_map>

#include "json_util.hpp"
#include "pragrank/error.hpp"
#include "pragrank/parallel.hpp"
#include "pragrank/prng.hpp"
#include "pragrank/rsa.hpp"
#include "pragrank/serialize.hpp"
#include "pragrank/version.hpp"

namespace pragrank {

using detail::Json;

std::vector<double> default_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
    return g;
}

namespace {

double parse_real(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw Error(ErrorCode::InvalidArgument, "not a number: '" + std::string(s) + "'");
    }
    return v;
}

// Snap a computed grid point to 12 decimals so "0:1:0.1" yields the same
// doubles as writing the values out.
double snap(double v) { return std::round(v * 1e12) / 1e12; }

}  // namespace

std::vector<double> parse_grid(std::string_view text) {
    std::vector<double> g;
    if (text.find(':') != std::string_view::npos) {
        const auto a = text.find(':');
        const auto b = text.find(':', a + 1);
        if (b == std::string_view::npos) {
            throw Error(ErrorCode::InvalidArgument, "range grid must be start:stop:step");
        }
        const double start = parse_real(text.substr(0, a));
        const double stop = parse_real(text.substr(a + 1, b - a - 1));
        const double step = parse_real(text.substr(b + 1));
        if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid step must be positive");
        for (std::size_t i = 0;; ++i) {
            double v = start + static_cast<double>(i) * step;
            if (v > stop + 1e-9) break;
            v = std::abs(v - stop) < 1e-9 ? stop : snap(v);
            g.push_back(v);
            if (i > 1'000'000) throw Error(ErrorCode::InvalidArgument, "grid too large");
        }
    } else {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto end = text.find(',', pos);
            if (end == std::string_view::npos) end = text.size();
            auto item = text.substr(pos, end - pos);
            if (item.find_first_not_of(' ') != std::string_view::npos) g.push_back(parse_real(item));
            pos = end + 1;
        }
    }
    if (g.empty()) throw Error(ErrorCode::GridEmpty, "grid '" + std::string(text) + "' is empty");
    for (double v : g) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument,
                        "grid value " + format_real(v) + " outside [0, 1]");
        }
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

double neumaier_sum(std::span<const double> values) {
    double sum = 0.0;
    double comp = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

const SweepCell* SweepReport::find(Rule rule, std::optional<double> lambda,
                                   std::optional<double> alpha, std::string_view metric) const {
    for (const auto& c : cells) {
        if (c.rule == rule && c.lambda == lambda && c.alpha == alpha && c.metric == metric) return &c;
    }
    return nullptr;
}

const SweepOptimum* SweepReport::optimum(Rule rule, std::string_view metric) const {
    for (const auto& o : optima) {
        if (o.rule == rule && o.metric == metric) return &o;
    }
    return nullptr;
}

namespace {

struct Point {
    Rule rule;
    std::optional<double> lambda;
    std::optional<double> alpha;
    std::optional<std::size_t> oracle_metric;  // index into metrics
};

std::vector<double> normalized_grid(std::vector<double> g, const char* what) {
    if (g.empty()) throw Error(ErrorCode::GridEmpty, std::string(what) + " grid is empty");
    for (double v : g) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error(std::string(what) == "lambda" ? ErrorCode::LambdaOutOfRange
                                                      : ErrorCode::AlphaOutOfRange,
                        std::string(what) + " grid value " + format_real(v) + " outside [0, 1]");
        }
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

bool all_have_latent(std::span<const CandidatePool> pools) {
    for (const auto& p : pools) {
        for (const auto& c : p.candidates) {
            if (!c.logp_latent_rec) return false;
        }
    }
    return !pools.empty();
}

std::vector<Rule> resolve_rules(const SweepOptions& options, std::span<const CandidatePool> pools) {
    std::vector<Rule> rules = options.rules;
    if (rules.empty()) {
        rules = {Rule::AnswerRec, Rule::SourceRec, Rule::AnsSrcRec, Rule::Random, Rule::Oracle};
        if (all_have_latent(pools)) rules.push_back(Rule::LatentRec);
    }
    std::sort(rules.begin(), rules.end());
    rules.erase(std::unique(rules.begin(), rules.end()), rules.end());
    return rules;
}

std::vector<Point> make_points(const std::vector<Rule>& rules, const std::vector<double>& lambdas,
                               const std::vector<double>& alphas, std::size_t metric_count) {
    std::vector<Point> points;
    for (Rule r : rules) {
        switch (r) {
            case Rule::AnswerRec:
            case Rule::SourceRec:
            case Rule::LatentRec:
                for (double l : lambdas) points.push_back({r, l, std::nullopt, std::nullopt});
                break;
            case Rule::AnsSrcRec:
                for (double l : lambdas) {
                    for (double a : alphas) points.push_back({r, l, a, std::nullopt});
                }
                break;
            case Rule::Random:
                points.push_back({r, std::nullopt, std::nullopt, std::nullopt});
                break;
            case Rule::Oracle:
                for (std::size_t m = 0; m < metric_count; ++m) {
                    points.push_back({r, std::nullopt, std::nullopt, m});
                }
                break;
        }
    }
    return points;
}

Error with_pool(Error e, const std::string& pool_id) {
    return Error(e.code(), std::string(e.what()) + " (pool '" + pool_id + "')");
}

}  // namespace

SweepReport run_sweep(std::span<const Instance> instances, std::span<const CandidatePool> pools,
                      const SweepOptions& options) {
    if (options.metrics.empty()) throw Error(ErrorCode::InvalidArgument, "no metrics requested");
    if (pools.empty()) throw Error(ErrorCode::EmptyDataset, "no pools to sweep");
    const auto lambdas = normalized_grid(options.lambda_grid, "lambda");
    const auto alphas = normalized_grid(options.alpha_grid, "alpha");
    const auto rules = resolve_rules(options, pools);
    if (std::find(rules.begin(), rules.end(), Rule::Random) != rules.end() && options.seeds.empty()) {
        throw Error(ErrorCode::InvalidArgument, "random selection needs at least one seed");
    }
    const std::size_t M = options.metrics.size();
    for (const auto& m : options.metrics) {
        if (m.is_external() && !options.evaluator) {
            throw Error(ErrorCode::InvalidArgument,
                        "metric '" + m.str() + "' needs an external metric evaluator");
        }
    }

    std::unordered_map<std::string_view, const Instance*> by_id;
    for (const auto& in : instances) by_id.emplace(in.id, &in);
    std::vector<const Instance*> matched;
    matched.reserve(pools.size());
    for (const auto& p : pools) {
        auto it = by_id.find(p.instance_id);
        if (it == by_id.end()) {
            throw Error(ErrorCode::InvalidArgument, "pool '" + p.instance_id + "' has no instance");
        }
        if (p.candidates.empty()) {
            throw Error(ErrorCode::EmptyPool, "pool '" + p.instance_id + "' has no candidates");
        }
        if (it->second->references.empty()) {
            throw Error(ErrorCode::EmptyReferences,
                        "instance '" + p.instance_id + "' has no references");
        }
        matched.push_back(it->second);
    }

    const std::size_t N = pools.size();
    std::vector<bool> in_selection(N, false);
    std::size_t n_select = 0;
    if (options.selection_ids) {
        for (std::size_t i = 0; i < N; ++i) {
            if (options.selection_ids->count(pools[i].instance_id) != 0) {
                in_selection[i] = true;
                ++n_select;
            }
        }
        if (n_select == 0 || n_select == N) {
            throw Error(ErrorCode::InvalidArgument,
                        "selection split must leave both a selection and an evaluation set");
        }
    }

    const MetricEvaluator evaluator = options.evaluator
        ? options.evaluator
        : MetricEvaluator([tok = options.tokenizer](const MetricId& m, const Instance& in,
                                                     std::string_view cand) {
              return multi_ref(m, cand, in.references, tok);
          });

    // metric_values[i][m][c]
    std::vector<std::vector<std::vector<double>>> metric_values(N);
    parallel_for(N, options.workers, [&](std::size_t i) {
        auto& per = metric_values[i];
        per.assign(M, {});
        for (std::size_t m = 0; m < M; ++m) {
            per[m].reserve(pools[i].candidates.size());
            for (const auto& c : pools[i].candidates) {
                per[m].push_back(evaluator(options.metrics[m], *matched[i], c.text));
            }
        }
    });

    const auto points = make_points(rules, lambdas, alphas, M);

    // Cell layout: one cell per (point, metric), Oracle only for its own metric.
    struct CellRef {
        std::size_t point;
        std::size_t metric;
    };
    std::vector<CellRef> layout;
    for (std::size_t p = 0; p < points.size(); ++p) {
        if (points[p].oracle_metric) {
            layout.push_back({p, *points[p].oracle_metric});
        } else {
            for (std::size_t m = 0; m < M; ++m) layout.push_back({p, m});
        }
    }

    // chosen[i][p] : indices (one per seed for Random)
    std::vector<std::vector<std::vector<std::size_t>>> chosen(N);
    parallel_for(N, options.workers, [&](std::size_t i) {
        const CandidatePool& pool = pools[i];
        auto& out = chosen[i];
        out.resize(points.size());
        try {
            for (std::size_t p = 0; p < points.size(); ++p) {
                const Point& pt = points[p];
                switch (pt.rule) {
                    case Rule::Random:
                        for (auto seed : options.seeds) {
                            out[p].push_back(
                                random_index(seed, pool.instance_id, pool.candidates.size()));
                        }
                        break;
                    case Rule::Oracle:
                        out[p].push_back(argmax_lowest(metric_values[i][*pt.oracle_metric]));
                        break;
                    default: {
                        SelectorConfig cfg;
                        cfg.rule = pt.rule;
                        cfg.lambda = *pt.lambda;
                        cfg.alpha = pt.alpha.value_or(0.0);
                        out[p].push_back(argmax_lowest(combined_scores(pool, cfg)));
                        break;
                    }
                }
            }
        } catch (const Error& e) {
            throw with_pool(e, pool.instance_id);
        }
    });

    // values[i][cell]
    std::vector<std::vector<double>> values(N, std::vector<double>(layout.size()));
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t k = 0; k < layout.size(); ++k) {
            const auto& idx = chosen[i][layout[k].point];
            const auto& mv = metric_values[i][layout[k].metric];
            if (idx.size() == 1) {
                values[i][k] = mv[idx[0]];
            } else {
                std::vector<double> per_seed;
                per_seed.reserve(idx.size());
                for (auto c : idx) per_seed.push_back(mv[c]);
                values[i][k] = neumaier_sum(per_seed) / static_cast<double>(idx.size());
            }
        }
    }

    SweepReport report;
    auto mean_over = [&](std::size_t k, bool selection_set) {
        std::vector<double> col;
        for (std::size_t i = 0; i < N; ++i) {
            if (in_selection[i] == selection_set) col.push_back(values[i][k]);
        }
        return std::pair{neumaier_sum(col) / static_cast<double>(col.size()), col.size()};
    };

    std::vector<double> selection_means(layout.size(), 0.0);
    for (std::size_t k = 0; k < layout.size(); ++k) {
        const Point& pt = points[layout[k].point];
        SweepCell cell;
        cell.rule = pt.rule;
        cell.lambda = pt.lambda;
        cell.alpha = pt.alpha;
        cell.metric = options.metrics[layout[k].metric].str();
        auto [mean, count] = mean_over(k, false);
        cell.mean = mean;
        cell.count = count;
        if (n_select > 0) selection_means[k] = mean_over(k, true).first;
        report.cells.push_back(std::move(cell));
    }

    for (Rule r : rules) {
        if (!is_score_based(r)) continue;
        for (std::size_t m = 0; m < M; ++m) {
            std::optional<std::size_t> best;
            double best_key = 0.0;
            for (std::size_t k = 0; k < layout.size(); ++k) {
                if (points[layout[k].point].rule != r || layout[k].metric != m) continue;
                const double key = n_select > 0 ? selection_means[k] : report.cells[k].mean;
                if (!best || key > best_key) {
                    best = k;
                    best_key = key;
                }
            }
            if (!best) continue;
            const SweepCell& c = report.cells[*best];
            SweepOptimum o;
            o.rule = r;
            o.metric = c.metric;
            o.lambda = *c.lambda;
            o.alpha = c.alpha;
            o.value = c.mean;
            if (n_select > 0) o.selection_value = selection_means[*best];
            report.optima.push_back(std::move(o));
        }
    }

    if (options.details) {
        for (std::size_t i = 0; i < N; ++i) {
            InstanceDetail d;
            d.instance_id = pools[i].instance_id;
            d.selection = in_selection[i];
            d.values = values[i];
            for (const auto& ref : layout) d.chosen.push_back(chosen[i][ref.point]);
            report.details.push_back(std::move(d));
        }
    }

    SweepMetadata& md = report.metadata;
    md.tool_version = std::string(version());
    md.prng = std::string(kPrngAlgorithm);
    md.label = options.label;
    md.backend = options.backend;
    md.decoding = options.decoding;
    if (std::find(rules.begin(), rules.end(), Rule::Random) != rules.end()) md.seeds = options.seeds;
    md.lambda_grid = lambdas;
    md.alpha_grid = alphas;
    for (const auto& m : options.metrics) md.metrics.push_back(m.str());
    for (Rule r : rules) md.rules.emplace_back(to_string(r));
    md.instances = N;
    md.selection_instances = n_select;
    md.stemming = options.tokenizer.stem;
    return report;
}

// ---- report JSON ------------------------------------------------------------

namespace {

Json opt_real(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> read_opt_real(const Json& j, std::string_view field) {
    auto it = j.find(field);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) {
        throw Error(ErrorCode::SchemaError, "field '" + std::string(field) + "' must be a number");
    }
    return it->get<double>();
}

std::size_t read_count(const Json& j, std::string_view field) {
    const Json& v = detail::require(j, field);
    if (!v.is_number_unsigned()) {
        throw Error(ErrorCode::SchemaError,
                    "field '" + std::string(field) + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

template <class T>
std::vector<T> read_array(const Json& j, std::string_view field) {
    const Json& v = detail::require(j, field);
    if (!v.is_array()) {
        throw Error(ErrorCode::SchemaError, "field '" + std::string(field) + "' must be an array");
    }
    try {
        return v.get<std::vector<T>>();
    } catch (const Json::exception&) {
        throw Error(ErrorCode::SchemaError, "field '" + std::string(field) + "' has bad elements");
    }
}

}  // namespace

std::string report_to_json(const SweepReport& report) {
    const SweepMetadata& md = report.metadata;
    Json meta = Json::object();
    meta["tool_version"] = md.tool_version;
    meta["prng"] = md.prng;
    meta["label"] = md.label;
    meta["backend"] = md.backend;
    meta["decoding"] = md.decoding;
    meta["seeds"] = md.seeds;
    meta["lambda_grid"] = md.lambda_grid;
    meta["alpha_grid"] = md.alpha_grid;
    meta["metrics"] = md.metrics;
    meta["rules"] = md.rules;
    meta["instances"] = md.instances;
    meta["selection_instances"] = md.selection_instances;
    meta["stemming"] = md.stemming;

    Json cells = Json::array();
    for (const auto& c : report.cells) {
        Json j = Json::object();
        j["rule"] = std::string(to_string(c.rule));
        j["lambda"] = opt_real(c.lambda);
        j["alpha"] = opt_real(c.alpha);
        j["metric"] = c.metric;
        j["mean"] = c.mean;
        j["count"] = c.count;
        cells.push_back(std::move(j));
    }

    Json optima = Json::array();
    for (const auto& o : report.optima) {
        Json j = Json::object();
        j["rule"] = std::string(to_string(o.rule));
        j["metric"] = o.metric;
        j["lambda"] = o.lambda;
        j["alpha"] = opt_real(o.alpha);
        j["value"] = o.value;
        if (o.selection_value) j["selection_value"] = *o.selection_value;
        optima.push_back(std::move(j));
    }

    Json root = Json::object();
    root["metadata"] = std::move(meta);
    root["cells"] = std::move(cells);
    root["optima"] = std::move(optima);
    if (!report.details.empty()) {
        Json details = Json::array();
        for (const auto& d : report.details) {
            Json j = Json::object();
            j["id"] = d.instance_id;
            j["selection"] = d.selection;
            j["values"] = d.values;
            j["chosen"] = d.chosen;
            details.push_back(std::move(j));
        }
        root["instances"] = std::move(details);
    }
    return detail::dump_canonical(root);
}

SweepReport report_from_json(std::string_view text) {
    const Json root = detail::parse_json(text, "sweep report");
    SweepReport r;
    const Json& meta = detail::require(root, "metadata");
    SweepMetadata& md = r.metadata;
    md.tool_version = detail::require_string(meta, "tool_version");
    md.prng = detail::require_string(meta, "prng");
    md.label = detail::optional_string(meta, "label").value_or("");
    md.backend = detail::optional_string(meta, "backend").value_or("");
    md.decoding = detail::optional_string(meta, "decoding").value_or("");
    md.seeds = read_array<std::uint64_t>(meta, "seeds");
    md.lambda_grid = read_array<double>(meta, "lambda_grid");
    md.alpha_grid = read_array<double>(meta, "alpha_grid");
    md.metrics = read_array<std::string>(meta, "metrics");
    md.rules = read_array<std::string>(meta, "rules");
    md.instances = read_count(meta, "instances");
    md.selection_instances = read_count(meta, "selection_instances");
    if (auto it = meta.find("stemming"); it != meta.end() && it->is_boolean()) md.stemming = *it;

    const Json& cells = detail::require(root, "cells");
    if (!cells.is_array()) throw Error(ErrorCode::SchemaError, "field 'cells' must be an array");
    for (const auto& j : cells) {
        SweepCell c;
        c.rule = parse_rule(detail::require_string(j, "rule"));
        c.lambda = read_opt_real(j, "lambda");
        c.alpha = read_opt_real(j, "alpha");
        c.metric = detail::require_string(j, "metric");
        c.mean = detail::require_number(j, "mean");
        c.count = read_count(j, "count");
        r.cells.push_back(std::move(c));
    }
    const Json& optima = detail::require(root, "optima");
    if (!optima.is_array()) throw Error(ErrorCode::SchemaError, "field 'optima' must be an array");
    for (const auto& j : optima) {
        SweepOptimum o;
        o.rule = parse_rule(detail::require_string(j, "rule"));
        o.metric = detail::require_string(j, "metric");
        o.lambda = detail::require_number(j, "lambda");
        o.alpha = read_opt_real(j, "alpha");
        o.value = detail::require_number(j, "value");
        o.selection_value = read_opt_real(j, "selection_value");
        r.optima.push_back(std::move(o));
    }
    if (auto it = root.find("instances"); it != root.end()) {
        if (!it->is_array()) throw Error(ErrorCode::SchemaError, "field 'instances' must be an array");
        for (const auto& j : *it) {
            InstanceDetail d;
            d.instance_id = detail::require_string(j, "id");
            if (auto s = j.find("selection"); s != j.end() && s->is_boolean()) d.selection = *s;
            d.values = read_array<double>(j, "values");
            d.chosen = read_array<std::vector<std::size_t>>(j, "chosen");
            if (d.values.size() != r.cells.size() || d.chosen.size() != r.cells.size()) {
                throw Error(ErrorCode::SchemaError,
                            "instance '" + d.instance_id + "' detail does not match the cell list");
            }
            r.details.push_back(std::move(d));
        }
    }
    return r;
}

// ---- tables -------------------------------------------------------------------

namespace {

std::optional<SummaryEntry> cell_entry(const SweepReport& r, Rule rule, std::optional<double> lambda,
                                       const std::string& metric) {
    if (const SweepCell* c = r.find(rule, lambda, std::nullopt, metric)) {
        return SummaryEntry{c->mean, c->lambda, c->alpha};
    }
    return std::nullopt;
}

std::optional<SummaryEntry> optimum_entry(const SweepReport& r, Rule rule, const std::string& metric) {
    if (const SweepOptimum* o = r.optimum(rule, metric)) {
        return SummaryEntry{o->value, o->lambda, o->alpha};
    }
    return std::nullopt;
}

std::optional<SummaryEntry> row_entry(const SweepReport& r, std::string_view row,
                                      const std::string& metric) {
    if (row == kRowRandom) return cell_entry(r, Rule::Random, std::nullopt, metric);
    if (row == kRowLiteral) return cell_entry(r, Rule::AnswerRec, 0.0, metric);
    if (row == kRowAnswerReader) return cell_entry(r, Rule::AnswerRec, 1.0, metric);
    if (row == kRowSourceReader) return cell_entry(r, Rule::SourceRec, 1.0, metric);
    if (row == kRowAnswerOpt) return optimum_entry(r, Rule::AnswerRec, metric);
    if (row == kRowSourceOpt) return optimum_entry(r, Rule::SourceRec, metric);
    if (row == kRowAnsSrcOpt) return optimum_entry(r, Rule::AnsSrcRec, metric);
    if (row == kRowLatentOpt) return optimum_entry(r, Rule::LatentRec, metric);
    if (row == kRowOracle) return cell_entry(r, Rule::Oracle, std::nullopt, metric);
    return std::nullopt;
}

constexpr std::string_view kSummaryRows[] = {
    kRowRandom,    kRowLiteral,   kRowAnswerReader, kRowSourceReader, kRowAnswerOpt,
    kRowSourceOpt, kRowAnsSrcOpt, kRowLatentOpt,    kRowOracle,
};

constexpr std::string_view kFrequencyRows[] = {
    kRowRandom, kRowLiteral, kRowAnswerOpt, kRowSourceOpt, kRowAnsSrcOpt, kRowLatentOpt,
};

constexpr std::string_view kRelativeRows[] = {
    kRowLiteral, kRowAnswerOpt, kRowSourceOpt, kRowAnsSrcOpt, kRowLatentOpt,
};

std::vector<std::string> common_metrics(std::span<const SweepReport> reports,
                                        std::span<const std::string> requested) {
    if (!requested.empty()) return {requested.begin(), requested.end()};
    if (reports.empty()) return {};
    std::vector<std::string> out;
    for (const auto& m : reports.front().metadata.metrics) {
        bool everywhere = true;
        for (const auto& r : reports) {
            const auto& ms = r.metadata.metrics;
            if (std::find(ms.begin(), ms.end(), m) == ms.end()) everywhere = false;
        }
        if (everywhere) out.push_back(m);
    }
    return out;
}

std::string csv_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

SummaryTable summary_table(const SweepReport& report) {
    SummaryTable t;
    t.report = report.metadata.label;
    t.metrics = report.metadata.metrics;
    for (std::string_view row : kSummaryRows) {
        SummaryRow sr;
        sr.selector = std::string(row);
        bool any = false;
        for (const auto& m : t.metrics) {
            sr.entries.push_back(row_entry(report, row, m));
            any = any || sr.entries.back().has_value();
        }
        if (any) t.rows.push_back(std::move(sr));
    }
    return t;
}

FrequencyTable top_frequency_table(std::span<const SweepReport> reports,
                                   std::span<const std::string> metrics) {
    FrequencyTable t;
    t.metrics = common_metrics(reports, metrics);
    t.reports = reports.size();
    std::vector<std::string_view> present;
    for (std::string_view row : kFrequencyRows) {
        bool seen = false;
        for (const auto& r : reports) {
            for (const auto& m : t.metrics) seen = seen || row_entry(r, row, m).has_value();
        }
        if (seen) present.push_back(row);
    }
    for (auto row : present) t.selectors.emplace_back(row);
    t.counts.assign(present.size(), std::vector<std::size_t>(t.metrics.size(), 0));
    for (const auto& r : reports) {
        for (std::size_t m = 0; m < t.metrics.size(); ++m) {
            std::vector<std::optional<double>> vals;
            std::optional<double> best;
            for (auto row : present) {
                auto e = row_entry(r, row, t.metrics[m]);
                vals.push_back(e ? std::optional<double>(e->value) : std::nullopt);
                if (e && (!best || e->value > *best)) best = e->value;
            }
            if (!best) continue;
            for (std::size_t s = 0; s < present.size(); ++s) {
                if (vals[s] && *vals[s] == *best) ++t.counts[s][m];
            }
        }
    }
    return t;
}

RelativeChangeTable relative_change_table(std::span<const SweepReport> reports,
                                          std::span<const std::string> metrics,
                                          RelativeAggregation aggregation) {
    RelativeChangeTable t;
    t.metrics = common_metrics(reports, metrics);
    for (const auto& r : reports) {
        bool has_random = false;
        for (const auto& c : r.cells) has_random = has_random || c.rule == Rule::Random;
        if (!has_random) {
            throw Error(ErrorCode::InvalidArgument,
                        "report '" + r.metadata.label + "' has no random baseline");
        }
    }
    for (std::string_view row : kRelativeRows) {
        bool seen = false;
        for (const auto& r : reports) {
            for (const auto& m : t.metrics) seen = seen || row_entry(r, row, m).has_value();
        }
        if (!seen) continue;
        t.selectors.emplace_back(row);
        std::vector<std::optional<double>> out;
        for (const auto& m : t.metrics) {
            std::vector<double> changes, sel, base;
            bool defined = !reports.empty();
            for (const auto& r : reports) {
                auto s = row_entry(r, row, m);
                auto b = row_entry(r, kRowRandom, m);
                if (!s || !b) {
                    defined = false;
                    break;
                }
                sel.push_back(s->value);
                base.push_back(b->value);
                if (aggregation == RelativeAggregation::MeanOfChanges) {
                    if (b->value == 0.0) {
                        defined = false;
                        break;
                    }
                    changes.push_back(100.0 * (s->value - b->value) / b->value);
                }
            }
            if (!defined) {
                out.emplace_back();
                continue;
            }
            const double n = static_cast<double>(reports.size());
            if (aggregation == RelativeAggregation::MeanOfChanges) {
                out.emplace_back(neumaier_sum(changes) / n);
            } else {
                const double ms = neumaier_sum(sel) / n;
                const double mb = neumaier_sum(base) / n;
                if (mb == 0.0) {
                    out.emplace_back();
                } else {
                    out.emplace_back(100.0 * (ms - mb) / mb);
                }
            }
        }
        t.percent.push_back(std::move(out));
    }
    return t;
}

TradeoffCurves tradeoff_curves(const SweepReport& report, std::span<const Rule> rules,
                               std::span<const std::string> quality_metrics,
                               std::span<const std::string> text_metrics) {
    TradeoffCurves out;
    if (text_metrics.empty()) {
        out.warnings.emplace_back("no text-quality metrics given; emitting quality curves only");
    }
    std::vector<std::string> metrics(quality_metrics.begin(), quality_metrics.end());
    metrics.insert(metrics.end(), text_metrics.begin(), text_metrics.end());
    const auto& known = report.metadata.metrics;
    for (Rule rule : rules) {
        if (!is_score_based(rule)) {
            throw Error(ErrorCode::InvalidArgument,
                        std::string(to_string(rule)) + " has no lambda curve");
        }
        for (const auto& m : metrics) {
            if (std::find(known.begin(), known.end(), m) == known.end()) {
                out.warnings.push_back("metric '" + m + "' is not in the report; skipped");
                continue;
            }
            std::optional<double> alpha;
            if (rule == Rule::AnsSrcRec) {
                const SweepOptimum* o = report.optimum(rule, m);
                if (o == nullptr) {
                    out.warnings.push_back("no " + std::string(to_string(rule)) + " optimum for '" +
                                           m + "'; skipped");
                    continue;
                }
                alpha = o->alpha;
            }
            for (double l : report.metadata.lambda_grid) {
                const SweepCell* c = report.find(rule, l, alpha, m);
                if (c == nullptr) {
                    out.warnings.push_back("missing cell " + std::string(to_string(rule)) +
                                           " lambda=" + format_real(l) + " metric=" + m);
                    continue;
                }
                out.rows.push_back({rule, l, m, c->mean});
            }
        }
    }
    return out;
}

std::string to_csv(std::span<const SummaryTable> tables) {
    std::string out = "report,selector";
    if (tables.empty()) return out + "\n";
    const auto& metrics = tables.front().metrics;
    for (const auto& t : tables) {
        if (t.metrics != metrics) {
            throw Error(ErrorCode::InvalidArgument, "summary tables list different metrics");
        }
    }
    for (const auto& m : metrics) {
        out += "," + csv_field(m) + "," + csv_field(m + "_lambda") + "," + csv_field(m + "_alpha");
    }
    out += "\n";
    for (const auto& t : tables) {
        for (const auto& row : t.rows) {
            out += csv_field(t.report) + "," + csv_field(row.selector);
            for (const auto& e : row.entries) {
                if (e) {
                    out += "," + format_real(e->value) + "," + csv_real(e->lambda) + "," +
                           csv_real(e->alpha);
                } else {
                    out += ",,,";
                }
            }
            out += "\n";
        }
    }
    return out;
}

std::string to_csv(const SummaryTable& table) { return to_csv(std::span(&table, 1)); }

std::string to_csv(const FrequencyTable& table) {
    std::string out = "selector";
    for (const auto& m : table.metrics) out += "," + csv_field(m);
    out += ",reports\n";
    for (std::size_t s = 0; s < table.selectors.size(); ++s) {
        out += csv_field(table.selectors[s]);
        for (auto c : table.counts[s]) out += "," + std::to_string(c);
        out += "," + std::to_string(table.reports) + "\n";
    }
    return out;
}

std::string to_csv(const RelativeChangeTable& table) {
    std::string out = "selector";
    for (const auto& m : table.metrics) out += "," + csv_field(m);
    out += "\n";
    for (std::size_t s = 0; s < table.selectors.size(); ++s) {
        out += csv_field(table.selectors[s]);
        for (const auto& v : table.percent[s]) out += "," + (v ? format_real(*v) : "undefined");
        out += "\n";
    }
    return out;
}

std::string to_csv(const TradeoffCurves& curves) {
    std::string out = "rule,lambda,metric,value\n";
    for (const auto& r : curves.rows) {
        out += std::string(to_string(r.rule)) + "," + format_real(r.lambda) + "," +
               csv_field(r.metric) + "," + format_real(r.value) + "\n";
    }
    return out;
}

}  // namespace pragrank
