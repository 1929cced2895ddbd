#pragma once

// Character-level bigram language model with Laplace smoothing.
//
// For a history h (prompt followed by the continuation generated so far) the
// next-symbol probability is
//
//     P(c | h) = (N[ctx][c] + w * H[ctx][c] + 1) / (N[ctx][.] + w * H[ctx][.] + V)
//
// where ctx is the last byte of h (or the boundary state when h is empty or
// its last byte is outside the alphabet), N are bigram counts from the
// training corpus, H are bigram counts collected from h itself and V is the
// alphabet size. With w = 0 this is the plain smoothed bigram model; w > 0
// lets the prompt content shift the distribution, which is what makes
// reconstruction scores differ between candidates.
//
// Corpus lines are independent sequences starting in the boundary state.
// Bytes outside the alphabet reset the context to the boundary state and
// contribute no counts. A continuation containing such a byte has
// probability zero (score -inf).

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pragrank/backend.hpp"

namespace pragrank {

inline constexpr std::string_view kDefaultToyAlphabet = "abcdefghijklmnopqrstuvwxyz ";

struct ToyLMOptions {
    std::string alphabet{kDefaultToyAlphabet};
    double history_weight = 0.0;
    std::size_t max_context_bytes = 0;  // 0 disables the limit
};

class ToyBigramLM final : public Backend {
public:
    static ToyBigramLM from_corpus(std::string_view corpus, ToyLMOptions options = {});
    static ToyBigramLM from_file(const std::filesystem::path& path, ToyLMOptions options = {});
    // The corpus compiled into the library (core/assets/toy_corpus.txt).
    static ToyBigramLM builtin(ToyLMOptions options = {});

    std::string id() const override;
    ScoredText score(const Prompt& prompt, std::string_view continuation) const override;
    std::vector<ScoredText> generate(const Prompt& prompt, std::size_t n,
                                     const DecodingSpec& spec) const override;

    const std::string& alphabet() const noexcept { return options_.alphabet; }
    std::size_t vocabulary_size() const noexcept { return options_.alphabet.size(); }
    double history_weight() const noexcept { return options_.history_weight; }

    // Index of `byte` in the alphabet, or -1.
    int symbol_of(unsigned char byte) const noexcept { return symbol_[byte]; }
    // Context row for a preceding byte; the boundary row for out-of-alphabet bytes.
    std::size_t context_of(unsigned char byte) const noexcept;
    std::size_t boundary_context() const noexcept { return vocabulary_size(); }

    double corpus_count(std::size_t context, std::size_t symbol) const;
    double corpus_row_total(std::size_t context) const;

    // Next-symbol distribution after `history`, in alphabet order.
    std::vector<double> next_distribution(std::string_view history) const;

private:
    class State;

    explicit ToyBigramLM(ToyLMOptions options);
    void check_prompt(const Prompt& prompt) const;
    std::vector<ScoredText> beam_search(const Prompt& prompt, std::size_t n,
                                        const DecodingSpec& spec) const;

    ToyLMOptions options_;
    std::array<int, 256> symbol_{};
    std::vector<double> counts_;      // (V + 1) x V
    std::vector<double> row_totals_;  // V + 1
    std::uint64_t corpus_hash_ = 0;
};

}  // namespace pragrank
