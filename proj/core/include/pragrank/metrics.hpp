#pragma once

// Reference-based summary metrics: ROUGE-1/2, ROUGE-L and an exact-match
// METEOR variant, plus multi-reference max aggregation.
//
// Tokenization: ASCII letters are lowercased; tokens are maximal runs of
// ASCII letters, digits and non-ASCII bytes; everything else separates.
// Stemming (Porter) is available but off by default.
//
// meteor_lite uses exact unigram matches only, alpha = 0.9, beta = 3,
// gamma = 0.5:
//     Fmean   = P * R / (0.9 * P + 0.1 * R)
//     penalty = 0.5 * (chunks / matches)^3
//     score   = Fmean * (1 - penalty)
// The alignment maximizes matches and then minimizes chunks exactly.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pragrank {

using TokenSeq = std::vector<std::string>;

struct TokenizerOptions {
    bool stem = false;
};

TokenSeq tokenize(std::string_view text, TokenizerOptions options = {});

// Porter (1980) suffix stripper; expects a lowercase ASCII word.
std::string porter_stem(std::string_view word);

struct MetricScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// f1 = 2PR / (P + R), 0 when P + R = 0.
MetricScore make_score(double precision, double recall) noexcept;

// n in {1, 2}; throws InvalidArgument otherwise.
MetricScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                    int n);
MetricScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

struct MeteorAlignment {
    std::size_t matches = 0;
    std::size_t chunks = 0;
    bool exact = true;  // false when the search budget ran out
};

inline constexpr std::size_t kMeteorSearchBudget = 200'000;

MeteorAlignment meteor_align(std::span<const std::string> candidate,
                             std::span<const std::string> reference,
                             std::size_t state_budget = kMeteorSearchBudget);

// Score from an alignment and the two sequence lengths.
double meteor_from_alignment(const MeteorAlignment& alignment, std::size_t candidate_len,
                             std::size_t reference_len) noexcept;

double meteor_lite(std::span<const std::string> candidate, std::span<const std::string> reference);

enum class MetricKind { Rouge1, Rouge2, RougeL, MeteorLite, External };

// "rouge1", "rouge2", "rougeL", "meteor_lite", "ext:<name>".
struct MetricId {
    MetricKind kind = MetricKind::Rouge1;
    std::string external_name;

    static MetricId parse(std::string_view text);
    std::string str() const;
    bool is_external() const noexcept { return kind == MetricKind::External; }

    bool operator==(const MetricId&) const = default;
};

std::vector<MetricId> parse_metric_list(std::string_view comma_separated);

// Single-pair value reported for a native metric (f1 for ROUGE, the score for METEOR).
double pair_score(const MetricId& metric, std::span<const std::string> candidate,
                  std::span<const std::string> reference);

// Max over references. Throws EmptyReferences, InvalidArgument for external ids.
double multi_ref(const MetricId& metric, std::string_view candidate,
                 std::span<const std::string> references, TokenizerOptions options = {});

}  // namespace pragrank
