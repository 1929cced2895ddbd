#pragma once

// Shared domain records. Everything here is a plain value type; pipeline
// stages build new records rather than editing old ones.
//
// Log-scores are natural-log probabilities, raw sums over tokens (no length
// normalization). -infinity encodes a zero-probability continuation.
// Candidate indices are 0-based.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pragrank {

// Unknown JSON members kept verbatim (key, raw JSON text) so that records
// survive a load/save cycle without losing fields this tool does not know.
using ExtraFields = std::vector<std::pair<std::string, std::string>>;

struct Instance {
    std::string id;
    std::string source;                      // x
    std::string query;                       // q
    std::vector<std::string> references;     // at least one
    std::optional<std::string> gold_answer;
    std::optional<std::string> latent;       // z
    ExtraFields extra;

    bool operator==(const Instance&) const = default;
};

struct Candidate {
    std::string text;
    std::optional<double> logp_s0;           // log P_S0(y | x, q)
    std::optional<double> logp_answer_rec;   // log P_R1(a | y, q)
    std::optional<double> logp_source_rec;   // log P_R1(x | y)
    std::optional<double> logp_latent_rec;   // log P(z | y)
    ExtraFields extra;

    bool operator==(const Candidate&) const = default;
};

struct CandidatePool {
    std::string instance_id;
    std::optional<std::string> answer;       // a = F(x, q)
    std::vector<Candidate> candidates;       // generation order
    ExtraFields extra;

    bool operator==(const CandidatePool&) const = default;
};

inline constexpr std::size_t kDefaultPoolSize = 10;

enum class Rule { AnswerRec, SourceRec, AnsSrcRec, LatentRec, Random, Oracle };

std::string_view to_string(Rule rule) noexcept;
// Accepts the kebab-case ids ("answer-rec", "ans-src-rec", ...).
Rule parse_rule(std::string_view text);

bool is_score_based(Rule rule) noexcept;

struct SelectorConfig {
    Rule rule = Rule::AnswerRec;
    double lambda = 0.0;                     // weight of the reader score
    double alpha = 0.0;                      // source share inside the reader term (AnsSrcRec)
    std::optional<std::uint64_t> seed;       // Random only
    std::optional<std::string> oracle_metric;  // Oracle only

    bool operator==(const SelectorConfig&) const = default;
};

// Throws LambdaOutOfRange / AlphaOutOfRange / InvalidArgument.
void validate(const SelectorConfig& config);

struct Selection {
    std::string instance_id;
    SelectorConfig config;
    std::size_t chosen_index = 0;
    std::optional<std::vector<double>> combined_scores;  // absent for Random and Oracle

    bool operator==(const Selection&) const = default;
};

// Record-level invariants. Throw Error(SchemaError) naming the offending field.
void validate(const Instance& instance);
void validate(const Candidate& candidate);
void validate(const CandidatePool& pool);

// A populated log-score must be finite and <= 0, or -infinity.
bool is_valid_log_score(double value) noexcept;

}  // namespace pragrank
