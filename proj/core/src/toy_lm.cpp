#include "pragrank/toy_lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "assets.hpp"
#include "pragrank/error.hpp"
#include "pragrank/prng.hpp"

namespace pragrank {

// Running history counts H and the current context.
class ToyBigramLM::State {
public:
    explicit State(const ToyBigramLM& lm)
        : lm_(&lm), context_(lm.boundary_context()) {
        if (lm.history_weight() != 0.0) {
            const std::size_t v = lm.vocabulary_size();
            hist_.assign((v + 1) * v, 0.0);
            hist_rows_.assign(v + 1, 0.0);
        }
    }

    void feed(std::string_view text) {
        for (unsigned char c : text) push(c);
    }

    void push(unsigned char byte) {
        const int sym = lm_->symbol_of(byte);
        if (sym >= 0 && !hist_.empty()) {
            hist_[context_ * lm_->vocabulary_size() + static_cast<std::size_t>(sym)] += 1.0;
            hist_rows_[context_] += 1.0;
        }
        context_ = lm_->context_of(byte);
    }

    double probability(std::size_t sym) const {
        const std::size_t v = lm_->vocabulary_size();
        double num = lm_->counts_[context_ * v + sym] + 1.0;
        double den = lm_->row_totals_[context_] + static_cast<double>(v);
        if (!hist_.empty()) {
            const double w = lm_->history_weight();
            num += w * hist_[context_ * v + sym];
            den += w * hist_rows_[context_];
        }
        return num / den;
    }

    std::vector<double> distribution() const {
        std::vector<double> p(lm_->vocabulary_size());
        for (std::size_t s = 0; s < p.size(); ++s) p[s] = probability(s);
        return p;
    }

private:
    const ToyBigramLM* lm_;
    std::size_t context_;
    std::vector<double> hist_;
    std::vector<double> hist_rows_;
};

ToyBigramLM::ToyBigramLM(ToyLMOptions options) : options_(std::move(options)) {
    symbol_.fill(-1);
    if (options_.alphabet.empty()) {
        throw Error(ErrorCode::InvalidArgument, "toy LM alphabet must be non-empty");
    }
    for (std::size_t i = 0; i < options_.alphabet.size(); ++i) {
        const auto byte = static_cast<unsigned char>(options_.alphabet[i]);
        if (symbol_[byte] >= 0) {
            throw Error(ErrorCode::InvalidArgument, "toy LM alphabet has a repeated byte");
        }
        symbol_[byte] = static_cast<int>(i);
    }
    if (!(options_.history_weight >= 0.0) || !std::isfinite(options_.history_weight)) {
        throw Error(ErrorCode::InvalidArgument, "toy LM history weight must be finite and >= 0");
    }
    const std::size_t v = options_.alphabet.size();
    counts_.assign((v + 1) * v, 0.0);
    row_totals_.assign(v + 1, 0.0);
}

ToyBigramLM ToyBigramLM::from_corpus(std::string_view corpus, ToyLMOptions options) {
    ToyBigramLM lm(std::move(options));
    const std::size_t v = lm.vocabulary_size();
    std::size_t ctx = lm.boundary_context();
    for (unsigned char c : corpus) {
        if (c == '\n') {
            ctx = lm.boundary_context();
            continue;
        }
        const int sym = lm.symbol_of(c);
        if (sym >= 0) {
            lm.counts_[ctx * v + static_cast<std::size_t>(sym)] += 1.0;
            lm.row_totals_[ctx] += 1.0;
        }
        ctx = lm.context_of(c);
    }
    lm.corpus_hash_ = fnv1a64(corpus);
    return lm;
}

ToyBigramLM ToyBigramLM::from_file(const std::filesystem::path& path, ToyLMOptions options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open corpus file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_corpus(buf.str(), std::move(options));
}

ToyBigramLM ToyBigramLM::builtin(ToyLMOptions options) {
    return from_corpus(detail::embedded_asset("toy_corpus.txt"), std::move(options));
}

std::string ToyBigramLM::id() const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "toy-bigram:V=%zu:w=%.17g:corpus=%016llx", vocabulary_size(),
                  options_.history_weight, static_cast<unsigned long long>(corpus_hash_));
    return buf;
}

std::size_t ToyBigramLM::context_of(unsigned char byte) const noexcept {
    const int sym = symbol_[byte];
    return sym >= 0 ? static_cast<std::size_t>(sym) : boundary_context();
}

double ToyBigramLM::corpus_count(std::size_t context, std::size_t symbol) const {
    return counts_.at(context * vocabulary_size() + symbol);
}

double ToyBigramLM::corpus_row_total(std::size_t context) const {
    return row_totals_.at(context);
}

std::vector<double> ToyBigramLM::next_distribution(std::string_view history) const {
    State st(*this);
    st.feed(history);
    return st.distribution();
}

void ToyBigramLM::check_prompt(const Prompt& prompt) const {
    if (options_.max_context_bytes != 0 && prompt.text.size() > options_.max_context_bytes) {
        throw Error(ErrorCode::TokenizationOverflow,
                    "prompt of " + std::to_string(prompt.text.size()) +
                        " bytes exceeds the toy LM context of " +
                        std::to_string(options_.max_context_bytes));
    }
}

ScoredText ToyBigramLM::score(const Prompt& prompt, std::string_view continuation) const {
    if (continuation.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cannot score an empty continuation");
    }
    check_prompt(prompt);
    State st(*this);
    st.feed(prompt.text);
    ScoredText out;
    out.text = std::string(continuation);
    out.token_logprobs.reserve(continuation.size());
    for (unsigned char c : continuation) {
        const int sym = symbol_of(c);
        const double lp = sym >= 0 ? std::log(st.probability(static_cast<std::size_t>(sym)))
                                   : -std::numeric_limits<double>::infinity();
        out.token_logprobs.push_back(lp);
        out.total_logprob += lp;
        st.push(c);
    }
    return out;
}

namespace {

// Temperature-adjusted weights p^(1/T), scaled by the max for stability.
std::vector<double> tempered(const std::vector<double>& p, double temperature) {
    double max_log = -std::numeric_limits<double>::infinity();
    for (double x : p) max_log = std::max(max_log, std::log(x));
    std::vector<double> q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        q[i] = std::exp((std::log(p[i]) - max_log) / temperature);
    }
    return q;
}

// Indices ordered by descending weight, ties by ascending index.
std::vector<std::size_t> ranked(const std::vector<double>& w) {
    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
    return order;
}

std::size_t argmax(const std::vector<double>& p) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i] > p[best]) best = i;
    }
    return best;
}

std::size_t draw(const std::vector<std::size_t>& support, const std::vector<double>& weight,
                 Rng& rng) {
    double total = 0.0;
    for (std::size_t i : support) total += weight[i];
    const double u = rng.uniform() * total;
    double cum = 0.0;
    for (std::size_t i : support) {
        cum += weight[i];
        if (u < cum) return i;
    }
    return support.back();
}

std::size_t sample_step(const std::vector<double>& p, const DecodingSpec& spec, Rng& rng) {
    switch (spec.method) {
        case DecodingMethod::Standard: {
            const auto q = tempered(p, spec.temperature);
            std::vector<std::size_t> all(p.size());
            std::iota(all.begin(), all.end(), std::size_t{0});
            return draw(all, q, rng);
        }
        case DecodingMethod::TopK: {
            const auto q = tempered(p, spec.temperature);
            auto order = ranked(p);
            order.resize(std::min<std::size_t>(order.size(), *spec.k));
            return draw(order, q, rng);
        }
        case DecodingMethod::Nucleus: {
            const auto q = tempered(p, spec.temperature);
            const double total = std::accumulate(q.begin(), q.end(), 0.0);
            auto order = ranked(q);
            double cum = 0.0;
            std::size_t keep = 0;
            while (keep < order.size()) {
                cum += q[order[keep]] / total;
                ++keep;
                if (cum > *spec.p) break;
            }
            order.resize(keep);
            return draw(order, q, rng);
        }
        default:
            return argmax(p);
    }
}

}  // namespace

std::vector<ScoredText> ToyBigramLM::generate(const Prompt& prompt, std::size_t n,
                                              const DecodingSpec& spec) const {
    validate(spec);
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "generate requires n >= 1");
    if (spec.method == DecodingMethod::DiverseBeam) {
        throw Error(ErrorCode::UnsupportedDecoding,
                    "the toy LM does not implement diverse beam search");
    }
    check_prompt(prompt);
    if (spec.method == DecodingMethod::Beam) return beam_search(prompt, n, spec);

    State base(*this);
    base.feed(prompt.text);

    auto decode_one = [&](Rng* rng) {
        State st = base;
        ScoredText out;
        for (std::uint32_t t = 0; t < spec.max_new_tokens; ++t) {
            const auto p = st.distribution();
            const std::size_t sym = rng ? sample_step(p, spec, *rng) : argmax(p);
            const double lp = std::log(p[sym]);
            out.text.push_back(options_.alphabet[sym]);
            out.token_logprobs.push_back(lp);
            out.total_logprob += lp;
            st.push(static_cast<unsigned char>(options_.alphabet[sym]));
        }
        return out;
    };

    std::vector<ScoredText> result;
    result.reserve(n);
    if (spec.method == DecodingMethod::Greedy) {
        const ScoredText g = decode_one(nullptr);
        result.assign(n, g);
        return result;
    }
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(mix_seed(spec.seed, i));
        result.push_back(decode_one(&rng));
    }
    return result;
}

std::vector<ScoredText> ToyBigramLM::beam_search(const Prompt& prompt, std::size_t n,
                                                 const DecodingSpec& spec) const {
    const std::size_t width = *spec.beam_size;
    if (n > width) {
        throw Error(ErrorCode::InvalidArgument,
                    "beam search can return at most beam_size candidates");
    }
    struct Hyp {
        State state;
        ScoredText text;
    };
    State root(*this);
    root.feed(prompt.text);
    std::vector<Hyp> beam{Hyp{root, {}}};

    struct Expansion {
        std::size_t parent;
        std::size_t sym;
        double logp;
        double total;
    };
    const std::size_t v = vocabulary_size();
    for (std::uint32_t t = 0; t < spec.max_new_tokens; ++t) {
        std::vector<Expansion> pool;
        pool.reserve(beam.size() * v);
        for (std::size_t h = 0; h < beam.size(); ++h) {
            const auto p = beam[h].state.distribution();
            for (std::size_t s = 0; s < v; ++s) {
                const double lp = std::log(p[s]);
                pool.push_back({h, s, lp, beam[h].text.total_logprob + lp});
            }
        }
        // Stable: ties keep (parent rank, symbol) order.
        std::stable_sort(pool.begin(), pool.end(),
                         [](const Expansion& a, const Expansion& b) { return a.total > b.total; });
        pool.resize(std::min(pool.size(), width));
        std::vector<Hyp> next;
        next.reserve(pool.size());
        for (const auto& e : pool) {
            Hyp h = beam[e.parent];
            const char ch = options_.alphabet[e.sym];
            h.state.push(static_cast<unsigned char>(ch));
            h.text.text.push_back(ch);
            h.text.token_logprobs.push_back(e.logp);
            h.text.total_logprob += e.logp;
            next.push_back(std::move(h));
        }
        beam = std::move(next);
    }
    if (beam.size() < n) {
        throw Error(ErrorCode::InvalidArgument, "search space smaller than requested candidates");
    }
    std::vector<ScoredText> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(beam[i].text);
    return out;
}

}  // namespace pragrank
