#include <cmath>
#include <map>

#include "doctest.h"
#include "oracles.hpp"
#include "pragrank/error.hpp"
#include "pragrank/experiments.hpp"
#include "pragrank/rsa.hpp"

using namespace pragrank;

namespace {

std::string words(const oracle::Tokens& t) {
    std::string s;
    for (const auto& w : t) s += (s.empty() ? "" : " ") + w;
    return s.empty() ? "w0" : s;
}

oracle::Tokens split(const std::string& s) {
    oracle::Tokens out;
    std::istringstream in(s);
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

struct Data {
    std::vector<Instance> instances;
    std::vector<CandidatePool> pools;
};

Data make_data(std::uint64_t seed, std::size_t n, bool latent = true) {
    oracle::Gen g(seed);
    Data d;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string id = "i" + std::to_string(i);
        Instance in;
        in.id = id;
        in.source = "source";
        in.query = "query";
        in.references = {words(g.tokens(12, 8))};
        if (g.coin()) in.references.push_back(words(g.tokens(12, 8)));
        d.instances.push_back(in);
        auto p = g.pool(g.range(1, 6), id);
        for (auto& c : p.candidates) {
            c.text = words(g.tokens(10, 8));
            if (!latent) c.logp_latent_rec.reset();
        }
        d.pools.push_back(p);
    }
    return d;
}

// Rouge-1 F against the best reference, computed by the oracle.
double rouge1(const Instance& in, const std::string& text) {
    double best = 0.0;
    for (const auto& r : in.references) best = std::max(best, oracle::rouge_n(split(text), split(r), 1).f);
    return best;
}

SweepOptions options(std::vector<double> lambdas, std::vector<double> alphas) {
    SweepOptions o;
    o.lambda_grid = std::move(lambdas);
    o.alpha_grid = std::move(alphas);
    o.metrics = {MetricId::parse("rouge1"), MetricId::parse("meteor_lite")};
    return o;
}

SweepCell cell(Rule rule, std::optional<double> lambda, std::string metric, double mean) {
    SweepCell c;
    c.rule = rule;
    c.lambda = lambda;
    c.metric = std::move(metric);
    c.mean = mean;
    c.count = 1;
    return c;
}

SweepReport hand_report(std::string label, std::vector<std::string> metrics, double random,
                        double literal, double opt) {
    SweepReport r;
    r.metadata.label = std::move(label);
    r.metadata.lambda_grid = {0.0, 1.0};
    r.metadata.metrics = metrics;
    for (const auto& m : metrics) {
        r.cells.push_back(cell(Rule::AnswerRec, 0.0, m, literal));
        r.cells.push_back(cell(Rule::AnswerRec, 1.0, m, opt));
        r.cells.push_back(cell(Rule::Random, std::nullopt, m, random));
        SweepOptimum o;
        o.rule = Rule::AnswerRec;
        o.metric = m;
        o.lambda = literal > opt ? 0.0 : 1.0;
        o.value = std::max(literal, opt);
        r.optima.push_back(o);
    }
    return r;
}

}  // namespace

TEST_CASE("grids") {
    const auto d = default_grid();
    REQUIRE(d.size() == 11);
    for (int i = 0; i <= 10; ++i) CHECK(d[static_cast<std::size_t>(i)] == i / 10.0);
    CHECK(parse_grid("0:1:0.1") == d);
    CHECK(parse_grid("1,0,0.5,0.5") == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(parse_grid("0:1:0.25") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK_THROWS_AS(parse_grid(""), Error);
    CHECK_THROWS_AS(parse_grid("0,1.5"), Error);
    CHECK_THROWS_AS(parse_grid("0:1:0"), Error);
    CHECK_THROWS_AS(parse_grid("a,b"), Error);
}

TEST_CASE("compensated sum") {
    const std::vector<double> v{1e100, 1.0, -1e100};
    CHECK(neumaier_sum(v) == 1.0);
    CHECK(neumaier_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("endpoint cells equal direct selection") {
    const auto d = make_data(41, 30);
    const auto rep = run_sweep(d.instances, d.pools, options({0.0, 1.0}, {0.0, 1.0}));
    for (Rule rule : {Rule::AnswerRec, Rule::SourceRec, Rule::LatentRec}) {
        for (double l : {0.0, 1.0}) {
            SelectorConfig c;
            c.rule = rule;
            c.lambda = l;
            std::vector<double> vals;
            for (std::size_t i = 0; i < d.pools.size(); ++i) {
                const auto sel = select(d.pools[i], c, d.instances[i]);
                vals.push_back(rouge1(d.instances[i], d.pools[i].candidates[sel.chosen_index].text));
            }
            double sum = 0.0;
            for (double v : vals) sum += v;
            const auto* cell = rep.find(rule, l, std::nullopt, "rouge1");
            REQUIRE(cell != nullptr);
            CHECK(cell->count == 30);
            CHECK(std::abs(cell->mean - sum / 30.0) <= 1e-12);
        }
    }
}

TEST_CASE("structural properties of a sweep") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto d = make_data(100 + seed, 15);
        auto o = options(default_grid(), {0.0, 0.5, 1.0});
        o.details = true;
        const auto rep = run_sweep(d.instances, d.pools, o);
        for (const char* m : {"rouge1", "meteor_lite"}) {
            const auto* oracle_cell = rep.find(Rule::Oracle, std::nullopt, std::nullopt, m);
            REQUIRE(oracle_cell != nullptr);
            for (const auto& c : rep.cells) {
                if (c.metric == m) CHECK(c.mean <= oracle_cell->mean + 1e-12);
            }
            const auto* a0 = rep.find(Rule::AnswerRec, 0.0, std::nullopt, m);
            const auto* s0 = rep.find(Rule::SourceRec, 0.0, std::nullopt, m);
            CHECK(a0->mean == s0->mean);
            for (double al : {0.0, 0.5, 1.0}) CHECK(rep.find(Rule::AnsSrcRec, 0.0, al, m)->mean == a0->mean);
            for (double l : default_grid()) {
                CHECK(rep.find(Rule::AnsSrcRec, l, 0.0, m)->mean ==
                      rep.find(Rule::AnswerRec, l, std::nullopt, m)->mean);
            }

            // Optimum by exhaustive search, ties to smallest lambda then alpha.
            for (Rule rule : {Rule::AnswerRec, Rule::SourceRec, Rule::AnsSrcRec, Rule::LatentRec}) {
                double best = -1.0;
                double bl = 0.0;
                std::optional<double> ba;
                for (const auto& c : rep.cells) {
                    if (c.rule != rule || c.metric != m) continue;
                    const bool better = c.mean > best ||
                        (c.mean == best && (*c.lambda < bl || (*c.lambda == bl && c.alpha < ba)));
                    if (better) {
                        best = c.mean;
                        bl = *c.lambda;
                        ba = c.alpha;
                    }
                }
                const auto* opt = rep.optimum(rule, m);
                REQUIRE(opt != nullptr);
                CHECK(opt->value == best);
                CHECK(opt->lambda == bl);
                CHECK(opt->alpha == ba);
            }
        }
        // Cell means are the averages of the per-instance values.
        REQUIRE(rep.details.size() == 15);
        for (std::size_t k = 0; k < rep.cells.size(); ++k) {
            double s = 0.0;
            for (const auto& det : rep.details) s += det.values[k];
            CHECK(std::abs(rep.cells[k].mean - s / 15.0) <= 1e-12);
        }
    }
}

TEST_CASE("random cell averages seeds with instance-keyed draws") {
    const auto d = make_data(51, 25);
    auto o = options({0.0}, {0.0});
    o.seeds = {0, 1, 2};
    o.rules = {Rule::Random};
    const auto rep = run_sweep(d.instances, d.pools, o);
    double total = 0.0;
    for (std::uint64_t s : o.seeds) {
        for (std::size_t i = 0; i < d.pools.size(); ++i) {
            const auto k = random_index(s, d.pools[i].instance_id, d.pools[i].candidates.size());
            total += rouge1(d.instances[i], d.pools[i].candidates[k].text);
        }
    }
    const auto* c = rep.find(Rule::Random, std::nullopt, std::nullopt, "rouge1");
    REQUIRE(c != nullptr);
    CHECK(std::abs(c->mean - total / 75.0) <= 1e-12);

    // Reordering instances does not change the random choice per instance.
    auto rev = d;
    std::reverse(rev.pools.begin(), rev.pools.end());
    const auto rep2 = run_sweep(rev.instances, rev.pools, o);
    CHECK(std::abs(rep2.find(Rule::Random, std::nullopt, std::nullopt, "rouge1")->mean - c->mean) <= 1e-12);
}

TEST_CASE("latent rule is included only when scores exist") {
    const auto with = run_sweep(make_data(1, 5).instances, make_data(1, 5).pools, options({0.5}, {0.5}));
    const auto d = make_data(1, 5, false);
    const auto without = run_sweep(d.instances, d.pools, options({0.5}, {0.5}));
    auto has = [](const SweepReport& r) {
        return std::find(r.metadata.rules.begin(), r.metadata.rules.end(), "latent-rec") != r.metadata.rules.end();
    };
    CHECK(has(with));
    CHECK_FALSE(has(without));
    auto o = options({0.5}, {0.5});
    o.rules = {Rule::LatentRec};
    try {
        run_sweep(d.instances, d.pools, o);
        FAIL("expected MissingScore");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingScore);
    }
}

TEST_CASE("report JSON round trip and determinism") {
    const auto d = make_data(61, 12);
    auto o = options(default_grid(), default_grid());
    o.details = true;
    o.label = "rt";
    const auto rep = run_sweep(d.instances, d.pools, o);
    const std::string json = report_to_json(rep);
    CHECK(report_from_json(json) == rep);
    CHECK(report_to_json(report_from_json(json)) == json);
    o.workers = 4;
    CHECK(report_to_json(run_sweep(d.instances, d.pools, o)) == json);
    CHECK(json.find("created") == std::string::npos);
}

TEST_CASE("selection split") {
    const auto d = make_data(71, 20);
    auto o = options(default_grid(), {0.0, 1.0});
    std::set<std::string> split;
    for (int i = 0; i < 8; ++i) split.insert("i" + std::to_string(i));
    o.selection_ids = split;
    const auto rep = run_sweep(d.instances, d.pools, o);
    CHECK(rep.metadata.selection_instances == 8);
    for (const auto& c : rep.cells) CHECK(c.count == 12);

    // The split's own sweep determines lambda*.
    std::vector<Instance> si(d.instances.begin(), d.instances.begin() + 8);
    std::vector<CandidatePool> sp(d.pools.begin(), d.pools.begin() + 8);
    const auto on_split = run_sweep(si, sp, options(default_grid(), {0.0, 1.0}));
    for (const auto& opt : rep.optima) {
        const auto* ref = on_split.optimum(opt.rule, opt.metric);
        REQUIRE(ref != nullptr);
        CHECK(opt.lambda == ref->lambda);
        CHECK(opt.alpha == ref->alpha);
        REQUIRE(opt.selection_value.has_value());
        CHECK(std::abs(*opt.selection_value - ref->value) <= 1e-12);
        CHECK(opt.value == rep.find(opt.rule, opt.lambda, opt.alpha, opt.metric)->mean);
    }
}

TEST_CASE("sweep errors") {
    auto d = make_data(81, 3);
    auto o = options({0.5}, {0.5});
    d.pools[1].instance_id = "nope";
    CHECK_THROWS_AS(run_sweep(d.instances, d.pools, o), Error);
    d = make_data(81, 3);
    o.metrics.clear();
    CHECK_THROWS_AS(run_sweep(d.instances, d.pools, o), Error);
    o = options({}, {0.5});
    try {
        run_sweep(d.instances, d.pools, o);
        FAIL("expected GridEmpty");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::GridEmpty);
    }
    o = options({0.5}, {0.5});
    o.metrics = {MetricId::parse("ext:x")};
    CHECK_THROWS_AS(run_sweep(d.instances, d.pools, o), Error);
    o.evaluator = [](const MetricId&, const Instance&, std::string_view c) {
        return static_cast<double>(c.size());
    };
    CHECK_NOTHROW(run_sweep(d.instances, d.pools, o));
}

TEST_CASE("summary table rows") {
    const auto d = make_data(91, 10);
    const auto rep = run_sweep(d.instances, d.pools, options(default_grid(), {0.0, 1.0}));
    const auto t = summary_table(rep);
    std::vector<std::string> rows;
    for (const auto& r : t.rows) rows.push_back(r.selector);
    CHECK(rows == std::vector<std::string>{"random", "literal", "answer-rec@1", "source-rec@1",
                                           "answer-rec@opt", "source-rec@opt", "ans-src-rec@opt",
                                           "latent-rec@opt", "oracle"});
    const auto& opt = t.rows[4].entries[0];
    REQUIRE(opt.has_value());
    CHECK(opt->lambda == rep.optimum(Rule::AnswerRec, "rouge1")->lambda);
    CHECK(to_csv(t).rfind("report,selector,rouge1,rouge1_lambda,rouge1_alpha,meteor_lite,"
                          "meteor_lite_lambda,meteor_lite_alpha\n", 0) == 0);
}

TEST_CASE("top frequency and relative change on hand-built reports") {
    const std::vector<SweepReport> reps{
        hand_report("a", {"rouge1", "meteor_lite"}, 0.5, 0.5625, 0.625),
        hand_report("b", {"rouge1", "meteor_lite"}, 0.25, 0.1875, 0.3125),
        hand_report("c", {"rouge1"}, 0.5, 0.5, 0.5),
    };
    const auto f = top_frequency_table(reps);
    CHECK(f.metrics == std::vector<std::string>{"rouge1"});
    CHECK(f.selectors == std::vector<std::string>{"random", "literal", "answer-rec@opt"});
    CHECK(f.counts == std::vector<std::vector<std::size_t>>{{1}, {1}, {3}});
    CHECK(to_csv(f) == "selector,rouge1,reports\nrandom,1,3\nliteral,1,3\nanswer-rec@opt,3,3\n");

    const auto r = relative_change_table(reps);
    CHECK(r.selectors == std::vector<std::string>{"literal", "answer-rec@opt"});
    CHECK(std::abs(*r.percent[0][0] - (12.5 - 25.0 + 0.0) / 3.0) <= 1e-12);
    CHECK(std::abs(*r.percent[1][0] - 50.0 / 3.0) <= 1e-12);

    const auto pooled = relative_change_table(reps, {}, RelativeAggregation::PooledMeans);
    CHECK(std::abs(*pooled.percent[0][0]) <= 1e-12);
    CHECK(std::abs(*pooled.percent[1][0] - 100.0 * (1.4375 - 1.25) / 1.25) <= 1e-12);

    // Exactly cancelling changes.
    const std::vector<SweepReport> two{hand_report("x", {"m"}, 0.625, 0.6875, 0.6875),
                                       hand_report("y", {"m"}, 0.625, 0.5625, 0.6875)};
    CHECK(*relative_change_table(two).percent[0][0] == 0.0);

    const std::vector<SweepReport> one{hand_report("z", {"m"}, 0.30, 0.33, 0.33)};
    CHECK(std::abs(*relative_change_table(one).percent[0][0] - 10.0) <= 1e-12);

    const std::vector<SweepReport> zero{hand_report("z", {"m"}, 0.0, 0.33, 0.33)};
    CHECK_FALSE(relative_change_table(zero).percent[0][0].has_value());
    CHECK(to_csv(relative_change_table(zero)) == "selector,m\nliteral,undefined\nanswer-rec@opt,undefined\n");

    auto no_random = hand_report("n", {"m"}, 0.1, 0.2, 0.3);
    no_random.cells.erase(std::remove_if(no_random.cells.begin(), no_random.cells.end(),
                                         [](const SweepCell& c) { return c.rule == Rule::Random; }),
                          no_random.cells.end());
    CHECK_THROWS_AS(relative_change_table(std::vector<SweepReport>{no_random}), Error);
}

TEST_CASE("tradeoff curves") {
    const auto d = make_data(95, 10);
    const auto rep = run_sweep(d.instances, d.pools, options(default_grid(), {0.0, 0.5, 1.0}));
    const std::vector<Rule> rules{Rule::AnswerRec};
    const std::vector<std::string> q{"rouge1"};
    const auto only_q = tradeoff_curves(rep, rules, q, {});
    CHECK(only_q.rows.size() == 11);
    CHECK(only_q.warnings.size() == 1);
    const std::vector<std::string> t{"meteor_lite", "ext:bertscore"};
    const std::vector<Rule> both{Rule::AnswerRec, Rule::AnsSrcRec};
    const auto c = tradeoff_curves(rep, both, q, t);
    CHECK(c.rows.size() == 44);
    CHECK(c.warnings.size() == 2);
    const double a_star = *rep.optimum(Rule::AnsSrcRec, "rouge1")->alpha;
    for (const auto& row : c.rows) {
        if (row.rule == Rule::AnsSrcRec && row.metric == "rouge1") {
            CHECK(row.value == rep.find(Rule::AnsSrcRec, row.lambda, a_star, "rouge1")->mean);
        }
    }
    CHECK(to_csv(only_q).rfind("rule,lambda,metric,value\nanswer-rec,0,rouge1,", 0) == 0);
    const std::vector<Rule> bad{Rule::Oracle};
    CHECK_THROWS_AS(tradeoff_curves(rep, bad, q, t), Error);
}
