#pragma once

// Independent reference implementations and random generators used by the
// unit tests and the acceptance binary. Nothing here calls into the code
// under test except for plain data types.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "pragrank/types.hpp"

namespace oracle {

using Tokens = std::vector<std::string>;

// ---- generators ---------------------------------------------------------------

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t u64() { return rng_(); }
    // Integer in [lo, hi].
    std::size_t range(std::size_t lo, std::size_t hi) { return lo + rng_() % (hi - lo + 1); }
    double real(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng_() >> 11) * 0x1.0p-53);
    }
    bool coin(double p = 0.5) { return real(0.0, 1.0) < p; }

    Tokens tokens(std::size_t max_len, std::size_t vocab) {
        Tokens t(range(0, max_len));
        for (auto& w : t) w = "w" + std::to_string(range(0, vocab - 1));
        return t;
    }

    std::string text(std::size_t max_len, std::string_view alphabet) {
        std::string s(range(0, max_len), ' ');
        for (auto& c : s) c = alphabet[range(0, alphabet.size() - 1)];
        return s;
    }

    // Pool with every score field populated by finite log-scores.
    pragrank::CandidatePool pool(std::size_t n, const std::string& id) {
        pragrank::CandidatePool p;
        p.instance_id = id;
        for (std::size_t i = 0; i < n; ++i) {
            pragrank::Candidate c;
            c.text = "candidate " + std::to_string(i);
            c.logp_s0 = real(-200.0, 0.0);
            c.logp_answer_rec = real(-200.0, 0.0);
            c.logp_source_rec = real(-200.0, 0.0);
            c.logp_latent_rec = real(-200.0, 0.0);
            p.candidates.push_back(std::move(c));
        }
        return p;
    }

private:
    std::mt19937_64 rng_;
};

// ---- metrics ------------------------------------------------------------------

struct PRF {
    double p = 0.0, r = 0.0, f = 0.0;
};

inline PRF prf(double p, double r) {
    PRF out{p, r, 0.0};
    if (p + r > 0.0) out.f = 2.0 * p * r / (p + r);
    return out;
}

// Clipped n-gram overlap by pairwise matching: each candidate n-gram claims
// the first unclaimed identical reference n-gram.
inline PRF rouge_n(const Tokens& cand, const Tokens& ref, std::size_t n) {
    auto grams = [n](const Tokens& t) {
        std::vector<Tokens> g;
        for (std::size_t i = 0; i + n <= t.size(); ++i) g.emplace_back(t.begin() + i, t.begin() + i + n);
        return g;
    };
    const auto cg = grams(cand);
    const auto rg = grams(ref);
    if (cg.empty() || rg.empty()) return {};
    std::vector<bool> claimed(rg.size(), false);
    std::size_t overlap = 0;
    for (const auto& g : cg) {
        for (std::size_t j = 0; j < rg.size(); ++j) {
            if (!claimed[j] && rg[j] == g) {
                claimed[j] = true;
                ++overlap;
                break;
            }
        }
    }
    return prf(static_cast<double>(overlap) / cg.size(), static_cast<double>(overlap) / rg.size());
}

// Top-down memoized LCS.
inline std::size_t lcs(const Tokens& a, const Tokens& b) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
        if (i == a.size() || j == b.size()) return 0;
        auto key = std::make_pair(i, j);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        std::size_t v = a[i] == b[j] ? 1 + go(i + 1, j + 1) : std::max(go(i + 1, j), go(i, j + 1));
        memo[key] = v;
        return v;
    };
    return go(0, 0);
}

// LCS by enumerating every subsequence of `a` (|a| <= 16).
inline std::size_t lcs_exhaustive(const Tokens& a, const Tokens& b) {
    std::size_t best = 0;
    for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
        std::size_t len = static_cast<std::size_t>(__builtin_popcount(mask));
        if (len <= best) continue;
        std::size_t j = 0;
        bool ok = true;
        for (std::size_t i = 0; i < a.size() && ok; ++i) {
            if (!(mask & (1u << i))) continue;
            while (j < b.size() && b[j] != a[i]) ++j;
            if (j == b.size()) ok = false;
            else ++j;
        }
        if (ok) best = len;
    }
    return best;
}

inline PRF rouge_l(const Tokens& cand, const Tokens& ref) {
    if (cand.empty() || ref.empty()) return {};
    const double l = static_cast<double>(lcs(cand, ref));
    return prf(l / cand.size(), l / ref.size());
}

struct Alignment {
    std::size_t matches = 0;
    std::size_t chunks = 0;
};

// Enumerates every alignment of exact matches (a partial injection between
// equal tokens), keeps those with the most matches, and returns the fewest
// chunks among them. A chunk is a maximal run of matches adjacent in both
// sequences.
inline Alignment meteor_enumerate(const Tokens& cand, const Tokens& ref) {
    Alignment best;
    bool found = false;
    std::vector<int> target(cand.size(), -1);
    std::vector<bool> used(ref.size(), false);
    std::function<void(std::size_t)> go = [&](std::size_t i) {
        if (i == cand.size()) {
            std::size_t m = 0, chunks = 0;
            long prev_i = -2, prev_j = -2;
            for (std::size_t k = 0; k < cand.size(); ++k) {
                if (target[k] < 0) continue;
                ++m;
                if (!(static_cast<long>(k) == prev_i + 1 && target[k] == prev_j + 1)) ++chunks;
                prev_i = static_cast<long>(k);
                prev_j = target[k];
            }
            if (!found || m > best.matches || (m == best.matches && chunks < best.chunks)) {
                best = {m, chunks};
                found = true;
            }
            return;
        }
        go(i + 1);
        for (std::size_t j = 0; j < ref.size(); ++j) {
            if (used[j] || ref[j] != cand[i]) continue;
            used[j] = true;
            target[i] = static_cast<int>(j);
            go(i + 1);
            target[i] = -1;
            used[j] = false;
        }
    };
    go(0);
    return best;
}

inline double meteor(const Tokens& cand, const Tokens& ref) {
    const Alignment a = meteor_enumerate(cand, ref);
    if (a.matches == 0) return 0.0;
    const double m = static_cast<double>(a.matches);
    const double p = m / cand.size();
    const double r = m / ref.size();
    const double fmean = 10.0 * p * r / (r + 9.0 * p);
    const double frag = static_cast<double>(a.chunks) / m;
    return fmean * (1.0 - 0.5 * std::pow(frag, 3.0));
}

// ---- toy language model -------------------------------------------------------

// Recounts everything from the raw corpus for every query.
struct NaiveBigram {
    std::string corpus;
    std::string alphabet;
    double w = 0.0;

    int index(char c) const {
        auto pos = alphabet.find(c);
        return pos == std::string::npos ? -1 : static_cast<int>(pos);
    }

    // Context symbol preceding position `i` in `s`; -1 is the boundary.
    int context_at(const std::string& s, std::size_t i) const {
        if (i == 0) return -1;
        return index(s[i - 1]);
    }

    // Count of (ctx -> c) transitions in one sequence, where ctx -1 matches
    // sequence start and out-of-alphabet predecessors.
    double transitions(const std::string& s, int ctx, int c) const {
        double n = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (index(s[i]) != c || c < 0) continue;
            if (context_at(s, i) == ctx) n += 1;
        }
        return n;
    }

    double row(const std::string& s, int ctx) const {
        double n = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (index(s[i]) >= 0 && context_at(s, i) == ctx) n += 1;
        }
        return n;
    }

    double prob(const std::string& history, char next) const {
        const int c = index(next);
        if (c < 0) return 0.0;
        const int ctx = history.empty() ? -1 : index(history.back());
        double num = 1.0, den = static_cast<double>(alphabet.size());
        std::stringstream lines(corpus);
        for (std::string line; std::getline(lines, line);) {
            num += transitions(line, ctx, c);
            den += row(line, ctx);
        }
        num += w * transitions(history, ctx, c);
        den += w * row(history, ctx);
        return num / den;
    }

    double logprob(const std::string& prompt, const std::string& continuation) const {
        double total = 0.0;
        std::string h = prompt;
        for (char c : continuation) {
            total += std::log(prob(h, c));
            h.push_back(c);
        }
        return total;
    }
};

struct BeamHyp {
    std::string text;
    double total = 0.0;
};

// Textbook beam search over the naive model: expand every hypothesis by
// every symbol, stable-sort by total log-probability, keep the top `width`.
inline std::vector<BeamHyp> beam_search(const NaiveBigram& lm, const std::string& prompt,
                                        std::size_t width, std::size_t len) {
    std::vector<BeamHyp> beam{BeamHyp{}};
    for (std::size_t t = 0; t < len; ++t) {
        std::vector<BeamHyp> pool;
        for (const auto& h : beam) {
            for (char c : lm.alphabet) {
                pool.push_back({h.text + c, h.total + std::log(lm.prob(prompt + h.text, c))});
            }
        }
        std::stable_sort(pool.begin(), pool.end(),
                         [](const BeamHyp& a, const BeamHyp& b) { return a.total > b.total; });
        pool.resize(std::min(pool.size(), width));
        beam = std::move(pool);
    }
    return beam;
}

// ---- process / file helpers -------------------------------------------------------

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

struct RunResult {
    int status = -1;
    std::string out;
    std::string err;
};

// Runs a shell command line, capturing stdout and stderr via temp files.
inline RunResult run(const std::string& cmd, const std::filesystem::path& scratch) {
    const auto out = scratch / "stdout.txt";
    const auto err = scratch / "stderr.txt";
    const std::string full = cmd + " >" + out.string() + " 2>" + err.string();
    const int raw = std::system(full.c_str());
    RunResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() /
               ("pragrank-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace oracle
