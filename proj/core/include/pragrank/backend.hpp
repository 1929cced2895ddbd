#pragma once

// Generation/scoring backends.
//
// A backend produces candidate continuations for a prompt and computes the
// exact conditional log-likelihood of a given continuation. Two
// implementations ship: ToyBigramLM (in-process, exact) and HttpBackend
// (JSON wire client for an external model server).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pragrank {

enum class DecodingMethod { Greedy, Beam, Standard, TopK, Nucleus, DiverseBeam };

std::string_view to_string(DecodingMethod method) noexcept;
DecodingMethod parse_decoding_method(std::string_view text);

struct DecodingSpec {
    DecodingMethod method = DecodingMethod::Greedy;
    double temperature = 1.0;
    std::optional<std::uint32_t> beam_size;   // Beam, DiverseBeam
    std::optional<std::uint32_t> k;           // TopK
    std::optional<double> p;                  // Nucleus, in (0, 1]
    std::optional<std::uint32_t> num_groups;  // DiverseBeam (wire pass-through)
    std::optional<double> diversity_penalty;  // DiverseBeam (wire pass-through)
    std::uint32_t max_new_tokens = 64;
    std::uint64_t seed = 0;

    bool operator==(const DecodingSpec&) const = default;
};

// Throws InvalidArgument when parameters do not match the method.
void validate(const DecodingSpec& spec);

// Parses "nucleus,p=0.95,temp=1.5", "beam,beam_size=5", "topk,k=640",
// "standard,temp=2", "greedy". max_new_tokens and seed come from elsewhere;
// "max_new_tokens=" and "seed=" keys are also accepted.
DecodingSpec parse_decoding(std::string_view text, DecodingSpec base = {});
std::string describe(const DecodingSpec& spec);

struct ScoredText {
    std::string text;
    double total_logprob = 0.0;          // <= 0 or -inf
    std::vector<double> token_logprobs;  // sums to total_logprob

    bool operator==(const ScoredText&) const = default;
};

// Prompt text plus its optional chat split. Role-less backends consume
// `text`; role-aware wire backends also receive the system/user parts.
struct Prompt {
    std::string text;
    std::optional<std::string> system;
    std::optional<std::string> user;

    Prompt() = default;
    Prompt(std::string plain) : text(std::move(plain)) {}  // NOLINT(implicit)
    Prompt(const char* plain) : text(plain) {}             // NOLINT(implicit)
};

class Backend {
public:
    virtual ~Backend() = default;

    // Stable identifier recorded in run metadata.
    virtual std::string id() const = 0;

    // log P(continuation | prompt). Empty continuation is a precondition
    // violation (InvalidArgument).
    virtual ScoredText score(const Prompt& prompt, std::string_view continuation) const = 0;

    // n continuations in generation order. Deterministic for a fixed spec.seed.
    virtual std::vector<ScoredText> generate(const Prompt& prompt, std::size_t n,
                                             const DecodingSpec& spec) const = 0;
};

inline constexpr std::uint32_t kDefaultAnswerBeamSize = 5;
inline constexpr std::uint32_t kDefaultAnswerMaxTokens = 32;

// a = F(source, query): top beam of the question-answering prompt.
ScoredText answer(const Backend& backend, std::string_view source, std::string_view query,
                  std::uint32_t beam_size = kDefaultAnswerBeamSize,
                  std::uint32_t max_new_tokens = kDefaultAnswerMaxTokens);

}  // namespace pragrank
