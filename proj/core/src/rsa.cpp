#include "pragrank/rsa.hpp"

#include <cmath>

#include "pragrank/error.hpp"
#include "pragrank/metrics.hpp"
#include "pragrank/prng.hpp"

namespace pragrank {

namespace {

void check_lambda(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw Error(ErrorCode::LambdaOutOfRange,
                    "lambda must lie in [0, 1], got " + std::to_string(lambda));
    }
}

void check_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::AlphaOutOfRange,
                    "alpha must lie in [0, 1], got " + std::to_string(alpha));
    }
}

double need(const std::optional<double>& v, Rule rule, const char* field, std::size_t index) {
    if (!v) {
        throw Error(ErrorCode::MissingScore, std::string(to_string(rule)) + " requires '" + field +
                                                 "' on every candidate (missing at index " +
                                                 std::to_string(index) + ")");
    }
    return *v;
}

// Unchecked forms; callers validate lambda/alpha once per pool.
double mix(double w_first, double first, double w_second, double second) {
    return weighted(w_first, first) + weighted(w_second, second);
}

}  // namespace

double weighted(double weight, double log_score) noexcept {
    return weight == 0.0 ? 0.0 : weight * log_score;
}

double combine_answer_rec(double logp_s0, double logp_ans, double lambda) {
    check_lambda(lambda);
    return mix(1.0 - lambda, logp_s0, lambda, logp_ans);
}

double combine_ans_src(double logp_s0, double logp_ans, double logp_src, double lambda,
                       double alpha) {
    check_lambda(lambda);
    check_alpha(alpha);
    // With a zero reader weight the reader term is dropped before it is formed,
    // so -inf reader scores cannot leak into the lambda = 0 endpoint.
    const double reader = lambda == 0.0 ? 0.0 : mix(1.0 - alpha, logp_ans, alpha, logp_src);
    return mix(1.0 - lambda, logp_s0, lambda, reader);
}

std::vector<double> combined_scores(const CandidatePool& pool, const SelectorConfig& config) {
    if (pool.candidates.empty()) {
        throw Error(ErrorCode::EmptyPool, "pool '" + pool.instance_id + "' has no candidates");
    }
    if (!is_score_based(config.rule)) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(to_string(config.rule)) + " is not a score-based rule");
    }
    check_lambda(config.lambda);
    check_alpha(config.alpha);
    const double lambda = config.lambda;
    const bool need_s0 = lambda != 1.0;
    const bool need_reader = lambda != 0.0;

    std::vector<double> out;
    out.reserve(pool.candidates.size());
    for (std::size_t i = 0; i < pool.candidates.size(); ++i) {
        const Candidate& c = pool.candidates[i];
        const double s0 = need_s0 ? need(c.logp_s0, config.rule, "logp_s0", i) : 0.0;
        double reader = 0.0;
        if (need_reader) {
            switch (config.rule) {
                case Rule::AnswerRec:
                    reader = need(c.logp_answer_rec, config.rule, "logp_answer_rec", i);
                    break;
                case Rule::SourceRec:
                    reader = need(c.logp_source_rec, config.rule, "logp_source_rec", i);
                    break;
                case Rule::LatentRec:
                    reader = need(c.logp_latent_rec, config.rule, "logp_latent_rec", i);
                    break;
                case Rule::AnsSrcRec: {
                    const double a = config.alpha != 1.0
                        ? need(c.logp_answer_rec, config.rule, "logp_answer_rec", i) : 0.0;
                    const double s = config.alpha != 0.0
                        ? need(c.logp_source_rec, config.rule, "logp_source_rec", i) : 0.0;
                    reader = mix(1.0 - config.alpha, a, config.alpha, s);
                    break;
                }
                default:
                    break;
            }
        }
        out.push_back(mix(1.0 - lambda, s0, lambda, reader));
    }
    return out;
}

std::size_t argmax_lowest(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyPool, "argmax over an empty list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

std::size_t random_index(std::uint64_t seed, std::string_view instance_id, std::size_t n) {
    if (n == 0) throw Error(ErrorCode::EmptyPool, "random selection from an empty pool");
    Rng rng(instance_seed(seed, instance_id));
    return static_cast<std::size_t>(rng.below(n));
}

Selection select(const CandidatePool& pool, const SelectorConfig& config, const Instance& instance,
                 const MetricFn* metric) {
    validate(config);
    if (pool.candidates.empty()) {
        throw Error(ErrorCode::EmptyPool, "pool '" + pool.instance_id + "' has no candidates");
    }
    Selection sel;
    sel.instance_id = pool.instance_id;
    sel.config = config;

    switch (config.rule) {
        case Rule::Random:
            sel.chosen_index = random_index(*config.seed, pool.instance_id, pool.candidates.size());
            return sel;
        case Rule::Oracle: {
            if (instance.id != pool.instance_id) {
                throw Error(ErrorCode::InvalidArgument,
                            "oracle: instance '" + instance.id + "' does not match pool '" +
                                pool.instance_id + "'");
            }
            if (instance.references.empty()) {
                throw Error(ErrorCode::EmptyReferences,
                            "oracle requires references for '" + instance.id + "'");
            }
            MetricFn native;
            if (metric == nullptr) {
                const MetricId id = MetricId::parse(*config.oracle_metric);
                if (id.kind == MetricKind::External) {
                    throw Error(ErrorCode::InvalidArgument,
                                "oracle over an external metric needs a metric function");
                }
                native = [id](std::string_view cand, std::span<const std::string> refs) {
                    return multi_ref(id, cand, refs);
                };
                metric = &native;
            }
            std::vector<double> values;
            values.reserve(pool.candidates.size());
            for (const auto& c : pool.candidates) values.push_back((*metric)(c.text, instance.references));
            sel.chosen_index = argmax_lowest(values);
            return sel;
        }
        default: {
            auto scores = combined_scores(pool, config);
            sel.chosen_index = argmax_lowest(scores);
            sel.combined_scores = std::move(scores);
            return sel;
        }
    }
}

Selection latent_rec_select(const CandidatePool& pool, double lambda) {
    SelectorConfig config;
    config.rule = Rule::LatentRec;
    config.lambda = lambda;
    check_lambda(lambda);
    Selection sel;
    sel.instance_id = pool.instance_id;
    sel.config = config;
    auto scores = combined_scores(pool, config);
    sel.chosen_index = argmax_lowest(scores);
    sel.combined_scores = std::move(scores);
    return sel;
}

}  // namespace pragrank
