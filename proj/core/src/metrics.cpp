#include "pragrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <unordered_map>

#include "pragrank/error.hpp"

namespace pragrank {

namespace {

bool word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

std::unordered_map<std::string, std::size_t> ngram_counts(std::span<const std::string> tokens,
                                                          int n) {
    std::unordered_map<std::string, std::size_t> counts;
    if (tokens.size() < static_cast<std::size_t>(n)) return counts;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int k = 1; k < n; ++k) {
            key.push_back('\x1f');
            key += tokens[i + static_cast<std::size_t>(k)];
        }
        ++counts[key];
    }
    return counts;
}

// Exact min-chunk search over maximum matchings.
//
// Candidate positions are visited left to right. At each position the word is
// either matched to an unused reference position of the same word (if that
// word still needs matches) or skipped (if enough later occurrences remain to
// meet its quota). A match opens a new chunk unless it extends the previous
// match by one position in both sequences. States are memoized on
// (position, previous reference index, used reference set).
class ChunkSearch {
public:
    ChunkSearch(std::span<const std::string> cand, std::span<const std::string> ref,
                std::size_t budget)
        : budget_(budget), m_(ref.size()) {
        std::unordered_map<std::string_view, int> ids;
        auto id_of = [&](std::string_view w) {
            auto [it, inserted] = ids.emplace(w, static_cast<int>(ids.size()));
            return it->second;
        };
        cand_.reserve(cand.size());
        for (const auto& w : cand) cand_.push_back(id_of(w));
        ref_.reserve(ref.size());
        for (const auto& w : ref) ref_.push_back(id_of(w));
        const std::size_t words = ids.size();
        ref_positions_.assign(words, {});
        for (std::size_t j = 0; j < ref_.size(); ++j) ref_positions_[ref_[j]].push_back(j);
        std::vector<std::size_t> cand_count(words, 0);
        for (int w : cand_) ++cand_count[w];
        quota_.assign(words, 0);
        for (std::size_t w = 0; w < words; ++w) {
            quota_[w] = std::min(cand_count[w], ref_positions_[w].size());
            matches_ += quota_[w];
        }
        // later_[i] = occurrences of cand_[i] strictly after i
        later_.assign(cand_.size(), 0);
        std::vector<std::size_t> seen(words, 0);
        for (std::size_t i = cand_.size(); i-- > 0;) {
            later_[i] = seen[cand_[i]]++;
        }
        words_ = (m_ + 63) / 64;
        used_.assign(words_, 0);
        // live_[i]: reference positions whose word still occurs in the
        // candidate at or after i. Other used bits cannot affect the rest of
        // the search, so they are left out of the memo key.
        live_.assign((cand_.size() + 1) * words_, 0);
        for (std::size_t i = cand_.size(); i-- > 0;) {
            std::copy_n(live_.begin() + static_cast<long>((i + 1) * words_), words_,
                        live_.begin() + static_cast<long>(i * words_));
            for (std::size_t j : ref_positions_[cand_[i]]) {
                live_[i * words_ + j / 64] |= std::uint64_t{1} << (j % 64);
            }
        }
        matched_.assign(words, 0);
    }

    MeteorAlignment run() {
        MeteorAlignment out;
        out.matches = matches_;
        if (matches_ == 0) return out;
        out.chunks = static_cast<std::size_t>(solve(0, -1));
        out.exact = exact_;
        return out;
    }

private:
    bool is_used(std::size_t j) const { return (used_[j / 64] >> (j % 64)) & 1U; }
    void flip(std::size_t j) { used_[j / 64] ^= (std::uint64_t{1} << (j % 64)); }

    std::string key(std::size_t i, long prev) const {
        std::string k;
        k.resize(sizeof(std::uint32_t) * 2 + words_ * sizeof(std::uint64_t));
        const auto pi = static_cast<std::uint32_t>(i);
        const auto pp = static_cast<std::uint32_t>(prev + 1);
        std::memcpy(k.data(), &pi, sizeof pi);
        std::memcpy(k.data() + sizeof pi, &pp, sizeof pp);
        for (std::size_t b = 0; b < words_; ++b) {
            const std::uint64_t bits = used_[b] & live_[i * words_ + b];
            std::memcpy(k.data() + 2 * sizeof pi + b * sizeof bits, &bits, sizeof bits);
        }
        return k;
    }

    // Minimum chunks opened from position i onward.
    int solve(std::size_t i, long prev) {
        // Positions whose word has no quota left are forced skips.
        while (i < cand_.size() && matched_[cand_[i]] == quota_[cand_[i]]) {
            ++i;
            prev = -1;
        }
        if (i == cand_.size()) return 0;

        const bool memo_ok = memo_.size() < budget_;
        std::string k;
        if (memo_ok) {
            k = key(i, prev);
            if (auto it = memo_.find(k); it != memo_.end()) return it->second;
        } else {
            exact_ = false;
        }

        const int w = cand_[i];
        const std::size_t remaining = quota_[w] - matched_[w];
        int best = INT32_MAX;

        // Extending the current chunk first gives a good early answer when
        // the budget forces a greedy completion.
        auto try_match = [&](std::size_t j) {
            flip(j);
            ++matched_[w];
            const long pj = static_cast<long>(j);
            const int cost = (prev >= 0 && pj == prev + 1 ? 0 : 1) + solve(i + 1, pj);
            --matched_[w];
            flip(j);
            best = std::min(best, cost);
        };

        const auto& positions = ref_positions_[w];
        std::size_t extend = SIZE_MAX;
        if (prev >= 0 && static_cast<std::size_t>(prev + 1) < m_ &&
            ref_[static_cast<std::size_t>(prev + 1)] == w && !is_used(static_cast<std::size_t>(prev + 1))) {
            extend = static_cast<std::size_t>(prev + 1);
            try_match(extend);
        }
        if (memo_ok || best == INT32_MAX) {
            for (std::size_t j : positions) {
                if (j == extend || is_used(j)) continue;
                try_match(j);
                if (!memo_ok) break;
            }
            if (later_[i] >= remaining && (memo_ok || best == INT32_MAX)) {
                best = std::min(best, solve(i + 1, -1));
            }
        }
        if (memo_ok) memo_.emplace(std::move(k), best);
        return best;
    }

    std::size_t budget_;
    std::size_t m_;
    std::vector<int> cand_;
    std::vector<int> ref_;
    std::vector<std::vector<std::size_t>> ref_positions_;
    std::vector<std::size_t> quota_;
    std::vector<std::size_t> matched_;
    std::vector<std::size_t> later_;
    std::size_t matches_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> used_;
    std::vector<std::uint64_t> live_;
    std::unordered_map<std::string, int> memo_;
    bool exact_ = true;
};

}  // namespace

TokenSeq tokenize(std::string_view text, TokenizerOptions options) {
    TokenSeq tokens;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        tokens.push_back(options.stem ? porter_stem(cur) : cur);
        cur.clear();
    };
    for (unsigned char c : text) {
        if (word_byte(c)) {
            cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

MetricScore make_score(double precision, double recall) noexcept {
    MetricScore s{precision, recall, 0.0};
    if (precision + recall > 0.0) s.f1 = 2.0 * precision * recall / (precision + recall);
    return s;
}

MetricScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                    int n) {
    if (n != 1 && n != 2) {
        throw Error(ErrorCode::InvalidArgument, "rouge_n supports n = 1 or 2");
    }
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    const std::size_t cand_total = candidate.size() >= static_cast<std::size_t>(n)
                                       ? candidate.size() - static_cast<std::size_t>(n) + 1 : 0;
    const std::size_t ref_total = reference.size() >= static_cast<std::size_t>(n)
                                      ? reference.size() - static_cast<std::size_t>(n) + 1 : 0;
    if (cand_total == 0 || ref_total == 0) return {};
    std::size_t overlap = 0;
    for (const auto& [gram, count] : cand) {
        if (auto it = ref.find(gram); it != ref.end()) overlap += std::min(count, it->second);
    }
    return make_score(static_cast<double>(overlap) / static_cast<double>(cand_total),
                      static_cast<double>(overlap) / static_cast<double>(ref_total));
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

MetricScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
    if (candidate.empty() || reference.empty()) return {};
    const auto l = static_cast<double>(lcs_length(candidate, reference));
    return make_score(l / static_cast<double>(candidate.size()),
                      l / static_cast<double>(reference.size()));
}

MeteorAlignment meteor_align(std::span<const std::string> candidate,
                             std::span<const std::string> reference, std::size_t state_budget) {
    ChunkSearch search(candidate, reference, state_budget);
    return search.run();
}

double meteor_from_alignment(const MeteorAlignment& a, std::size_t candidate_len,
                             std::size_t reference_len) noexcept {
    if (a.matches == 0 || candidate_len == 0 || reference_len == 0) return 0.0;
    const double m = static_cast<double>(a.matches);
    const double p = m / static_cast<double>(candidate_len);
    const double r = m / static_cast<double>(reference_len);
    const double fmean = p * r / (0.9 * p + 0.1 * r);
    const double frag = static_cast<double>(a.chunks) / m;
    const double penalty = 0.5 * frag * frag * frag;
    return fmean * (1.0 - penalty);
}

double meteor_lite(std::span<const std::string> candidate, std::span<const std::string> reference) {
    return meteor_from_alignment(meteor_align(candidate, reference), candidate.size(),
                                 reference.size());
}

MetricId MetricId::parse(std::string_view text) {
    if (text == "rouge1") return {MetricKind::Rouge1, {}};
    if (text == "rouge2") return {MetricKind::Rouge2, {}};
    if (text == "rougeL") return {MetricKind::RougeL, {}};
    if (text == "meteor_lite") return {MetricKind::MeteorLite, {}};
    if (text.starts_with("ext:") && text.size() > 4) {
        return {MetricKind::External, std::string(text.substr(4))};
    }
    throw Error(ErrorCode::InvalidArgument, "unknown metric id '" + std::string(text) + "'");
}

std::string MetricId::str() const {
    switch (kind) {
        case MetricKind::Rouge1: return "rouge1";
        case MetricKind::Rouge2: return "rouge2";
        case MetricKind::RougeL: return "rougeL";
        case MetricKind::MeteorLite: return "meteor_lite";
        case MetricKind::External: return "ext:" + external_name;
    }
    return "unknown";
}

std::vector<MetricId> parse_metric_list(std::string_view text) {
    std::vector<MetricId> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        const auto item = text.substr(start, end - start);
        if (!item.empty()) out.push_back(MetricId::parse(item));
        start = end + 1;
    }
    return out;
}

double pair_score(const MetricId& metric, std::span<const std::string> candidate,
                  std::span<const std::string> reference) {
    switch (metric.kind) {
        case MetricKind::Rouge1: return rouge_n(candidate, reference, 1).f1;
        case MetricKind::Rouge2: return rouge_n(candidate, reference, 2).f1;
        case MetricKind::RougeL: return rouge_l(candidate, reference).f1;
        case MetricKind::MeteorLite: return meteor_lite(candidate, reference);
        case MetricKind::External: break;
    }
    throw Error(ErrorCode::InvalidArgument,
                "metric '" + metric.str() + "' is external and has no native implementation");
}

double multi_ref(const MetricId& metric, std::string_view candidate,
                 std::span<const std::string> references, TokenizerOptions options) {
    if (references.empty()) {
        throw Error(ErrorCode::EmptyReferences, "multi-reference scoring needs at least one reference");
    }
    const TokenSeq cand = tokenize(candidate, options);
    double best = 0.0;
    for (std::size_t r = 0; r < references.size(); ++r) {
        const double v = pair_score(metric, cand, tokenize(references[r], options));
        best = r == 0 ? v : std::max(best, v);
    }
    return best;
}

}  // namespace pragrank
