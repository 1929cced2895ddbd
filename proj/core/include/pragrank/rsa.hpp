#pragma once

// Pragmatic re-ranking of a candidate pool.
//
// In log space the pragmatic summarizer's score for a candidate is
//
//     (1 - lambda) * log P_S0(y | x, q) + lambda * log P_R1(target | y)
//
// with lambda = 0 the literal summarizer and lambda = 1 the reader alone. The
// answer-source hybrid replaces the reader term by
// (1 - alpha) * log P_R1(a | y, q) + alpha * log P_R1(x | y).
//
// A zero weight annihilates its term even when the term is -inf, so the
// endpoints ignore the unused score entirely. Otherwise a -inf constituent
// makes the combined score -inf, which ranks below every finite candidate.
// Ties always go to the lowest candidate index.
//
// The latent-reconstruction variant historically weighted the literal score
// by lambda instead; here lambda weights the reader uniformly for every rule,
// so a reversed-convention value maps as lambda = 1 - lambda_reversed.

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pragrank/types.hpp"

namespace pragrank {

// 0 * (-inf) is taken as 0.
double weighted(double weight, double log_score) noexcept;

// Throws LambdaOutOfRange.
double combine_answer_rec(double logp_s0, double logp_ans, double lambda);

// Throws LambdaOutOfRange / AlphaOutOfRange.
double combine_ans_src(double logp_s0, double logp_ans, double logp_src, double lambda,
                       double alpha);

// Multi-reference metric used by the Oracle rule: (candidate, references) -> score.
using MetricFn = std::function<double(std::string_view, std::span<const std::string>)>;

// Combined score of every candidate under a score-based rule.
// Throws MissingScore naming the first absent field, EmptyPool.
std::vector<double> combined_scores(const CandidatePool& pool, const SelectorConfig& config);

// Index of the maximum, ties to the lowest index. Requires a non-empty span.
std::size_t argmax_lowest(std::span<const double> values);

// Uniform draw keyed by (seed, instance id): independent of instance order.
std::size_t random_index(std::uint64_t seed, std::string_view instance_id, std::size_t n);

// Applies `config` to one pool. Oracle uses `metric` when given, otherwise the
// native metric named by config.oracle_metric.
Selection select(const CandidatePool& pool, const SelectorConfig& config, const Instance& instance,
                 const MetricFn* metric = nullptr);

// LatentRec selection at the given lambda.
Selection latent_rec_select(const CandidatePool& pool, double lambda);

}  // namespace pragrank
