#include "pragrank/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "pragrank/error.hpp"

namespace pragrank {

namespace {

bool blank(std::string_view text) {
    return std::all_of(text.begin(), text.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

[[noreturn]] void schema(const std::string& what) {
    throw Error(ErrorCode::SchemaError, what);
}

void check_score(const std::optional<double>& value, const char* field) {
    if (value && !is_valid_log_score(*value)) {
        schema(std::string("field '") + field + "' must be a finite log-probability <= 0 or -inf");
    }
}

}  // namespace

std::string_view to_string(Rule rule) noexcept {
    switch (rule) {
        case Rule::AnswerRec: return "answer-rec";
        case Rule::SourceRec: return "source-rec";
        case Rule::AnsSrcRec: return "ans-src-rec";
        case Rule::LatentRec: return "latent-rec";
        case Rule::Random: return "random";
        case Rule::Oracle: return "oracle";
    }
    return "unknown";
}

Rule parse_rule(std::string_view text) {
    for (Rule r : {Rule::AnswerRec, Rule::SourceRec, Rule::AnsSrcRec, Rule::LatentRec,
                   Rule::Random, Rule::Oracle}) {
        if (to_string(r) == text) return r;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown selector rule '" + std::string(text) + "'");
}

bool is_score_based(Rule rule) noexcept {
    return rule != Rule::Random && rule != Rule::Oracle;
}

bool is_valid_log_score(double value) noexcept {
    if (std::isnan(value)) return false;
    if (std::isinf(value)) return value < 0;
    return value <= 0.0;
}

void validate(const SelectorConfig& config) {
    if (!(config.lambda >= 0.0 && config.lambda <= 1.0)) {
        throw Error(ErrorCode::LambdaOutOfRange,
                    "lambda must lie in [0, 1], got " + std::to_string(config.lambda));
    }
    if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
        throw Error(ErrorCode::AlphaOutOfRange,
                    "alpha must lie in [0, 1], got " + std::to_string(config.alpha));
    }
    if (config.rule == Rule::Random && !config.seed) {
        throw Error(ErrorCode::InvalidArgument, "random selector requires a seed");
    }
    if (config.rule == Rule::Oracle && (!config.oracle_metric || config.oracle_metric->empty())) {
        throw Error(ErrorCode::InvalidArgument, "oracle selector requires a metric id");
    }
}

void validate(const Instance& instance) {
    if (instance.id.empty()) schema("field 'id' must be a non-empty string");
    if (blank(instance.source)) schema("field 'source' must be non-empty");
    if (blank(instance.query)) schema("field 'query' must be non-empty");
    if (instance.references.empty()) schema("field 'references' must contain at least one summary");
    for (const auto& ref : instance.references) {
        if (ref.empty()) schema("field 'references' contains an empty summary");
    }
}

void validate(const Candidate& candidate) {
    if (candidate.text.empty()) schema("candidate 'text' must be non-empty");
    check_score(candidate.logp_s0, "logp_s0");
    check_score(candidate.logp_answer_rec, "logp_answer_rec");
    check_score(candidate.logp_source_rec, "logp_source_rec");
    check_score(candidate.logp_latent_rec, "logp_latent_rec");
}

void validate(const CandidatePool& pool) {
    if (pool.instance_id.empty()) schema("field 'instance_id' must be a non-empty string");
    if (pool.candidates.empty()) schema("field 'candidates' must contain at least one candidate");
    for (const auto& c : pool.candidates) validate(c);
}

}  // namespace pragrank
