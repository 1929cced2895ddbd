#include "pragrank/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "pragrank/error.hpp"
#include "pragrank/prng.hpp"
#include "pragrank/serialize.hpp"

namespace pragrank {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

bool blank(std::string_view line) {
    for (char c : line) {
        if (c != ' ' && c != '\t' && c != '\r') return false;
    }
    return true;
}

// Calls fn(line, line_number) for every non-blank line, tagging errors.
template <class Fn>
void for_each_line(std::string_view text, const std::string& origin, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!blank(line)) {
            try {
                fn(line, line_no);
            } catch (Error& e) {
                if (e.file().empty()) e.at(origin, line_no);
                throw;
            }
        }
        if (end == text.size()) break;
        pos = end + 1;
    }
}

template <class T, class Encode>
void write_lines(const std::filesystem::path& path, std::span<const T> records, Encode&& encode_one) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    for (const auto& r : records) out << encode_one(r) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::vector<Instance> parse_instances(std::string_view jsonl, const std::string& origin) {
    std::vector<Instance> out;
    std::unordered_set<std::string> seen;
    for_each_line(jsonl, origin, [&](std::string_view line, std::size_t) {
        Instance in = decode_instance(line);
        if (!seen.insert(in.id).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate instance id '" + in.id + "'");
        }
        out.push_back(std::move(in));
    });
    return out;
}

std::vector<Instance> load_instances(const std::filesystem::path& path) {
    return parse_instances(read_file(path), path.string());
}

std::vector<CandidatePool> load_pools(const std::filesystem::path& path) {
    std::vector<CandidatePool> out;
    std::unordered_set<std::string> seen;
    for_each_line(read_file(path), path.string(), [&](std::string_view line, std::size_t) {
        CandidatePool pool = decode_pool(line);
        if (!seen.insert(pool.instance_id).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate pool for instance '" + pool.instance_id + "'");
        }
        out.push_back(std::move(pool));
    });
    return out;
}

std::vector<Selection> load_selections(const std::filesystem::path& path) {
    std::vector<Selection> out;
    for_each_line(read_file(path), path.string(), [&](std::string_view line, std::size_t) {
        out.push_back(decode_selection(line));
    });
    return out;
}

void save_instances(const std::filesystem::path& path, std::span<const Instance> instances) {
    write_lines(path, instances, [](const Instance& r) { return encode(r); });
}

void save_pools(const std::filesystem::path& path, std::span<const CandidatePool> pools) {
    write_lines(path, pools, [](const CandidatePool& r) { return encode(r); });
}

void save_selections(const std::filesystem::path& path, std::span<const Selection> selections) {
    write_lines(path, selections, [](const Selection& r) { return encode(r); });
}

TruncationUnit parse_truncation_unit(std::string_view text) {
    if (text == "whitespace_token" || text == "token") return TruncationUnit::WhitespaceToken;
    if (text == "byte") return TruncationUnit::Byte;
    throw Error(ErrorCode::InvalidArgument,
                "unknown truncation unit '" + std::string(text) + "' (whitespace_token|byte)");
}

std::size_t whitespace_length(std::string_view text) {
    std::size_t n = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        if (is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++n;
        }
    }
    return n;
}

std::string truncate_text(std::string_view text, std::size_t max_units, TruncationUnit unit) {
    if (max_units == 0) throw Error(ErrorCode::InvalidArgument, "truncation length must be positive");
    if (unit == TruncationUnit::Byte) {
        if (text.size() <= max_units) return std::string(text);
        std::size_t cut = max_units;
        // Back off continuation bytes so the cut lands on a sequence start.
        while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
        return std::string(text.substr(0, cut));
    }
    std::size_t tokens = 0;
    bool in_token = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const bool space = is_space(static_cast<unsigned char>(text[i]));
        if (space && in_token && tokens == max_units) return std::string(text.substr(0, i));
        if (space) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++tokens;
        }
    }
    return std::string(text);
}

Instance truncate(const Instance& instance, std::size_t max_units, TruncationUnit unit) {
    Instance out = instance;
    out.source = truncate_text(instance.source, max_units, unit);
    return out;
}

DatasetStats stats(std::span<const Instance> instances) {
    if (instances.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no instances");
    std::set<std::pair<std::string_view, std::string_view>> pairs;
    double src = 0.0, qry = 0.0, ref = 0.0;
    for (const auto& in : instances) {
        pairs.emplace(in.source, in.query);
        src += static_cast<double>(whitespace_length(in.source));
        qry += static_cast<double>(whitespace_length(in.query));
        if (!in.references.empty()) {
            double r = 0.0;
            for (const auto& s : in.references) r += static_cast<double>(whitespace_length(s));
            ref += r / static_cast<double>(in.references.size());
        }
    }
    const double n = static_cast<double>(instances.size());
    DatasetStats st;
    st.test_size = pairs.size();
    st.avg_source_len = src / n;
    st.avg_query_len = qry / n;
    st.avg_reference_len = ref / n;
    return st;
}

namespace {

constexpr const char* kEntities[] = {
    "river", "garden", "market", "castle", "engine", "harbor", "library", "forest",
    "bridge", "tower",  "valley", "island", "school", "bakery", "museum",  "station",
};
constexpr const char* kAttributes[] = {
    "red",   "quiet", "ancient", "busy",  "narrow", "bright", "cold",  "green",
    "large", "small", "famous",  "empty", "warm",   "old",    "hidden", "open",
};
constexpr const char* kSubjects[] = {
    "the people", "a visitor", "the council", "the children", "a farmer", "the workers",
    "an artist",  "the mayor",
};
constexpr const char* kVerbs[] = {
    "walked to", "talked about", "looked at", "cleaned", "painted", "visited", "built",
    "opened",
};
constexpr const char* kObjects[] = {
    "the road", "a new wall", "the old gate", "the main square", "a small boat",
    "the north field", "a wooden fence", "the long hall",
};

template <std::size_t N>
const char* pick(Rng& rng, const char* const (&words)[N]) {
    return words[rng.below(N)];
}

}  // namespace

std::vector<Instance> make_fixture(const FixtureSpec& spec) {
    if (spec.count == 0) throw Error(ErrorCode::InvalidArgument, "fixture count must be positive");
    std::vector<Instance> out;
    out.reserve(spec.count);
    for (std::size_t i = 0; i < spec.count; ++i) {
        Rng rng(mix_seed(spec.seed, i));
        const std::string entity = pick(rng, kEntities);
        const std::string attribute = pick(rng, kAttributes);
        const std::string fact = "the " + entity + " is " + attribute;

        std::vector<std::string> filler;
        for (std::size_t s = 0; s < spec.filler_sentences; ++s) {
            filler.push_back(std::string(pick(rng, kSubjects)) + " " + pick(rng, kVerbs) + " " +
                             pick(rng, kObjects));
        }
        const std::size_t fact_pos = filler.empty() ? 0 : rng.below(filler.size() + 1);

        std::string source;
        for (std::size_t s = 0; s <= filler.size(); ++s) {
            const std::string& sentence = s == fact_pos ? fact : filler[s < fact_pos ? s : s - 1];
            if (!source.empty()) source += ' ';
            source += sentence;
        }

        Instance in;
        char id[32];
        std::snprintf(id, sizeof id, "fx-%04zu", i);
        in.id = id;
        in.source = std::move(source);
        in.query = "what is the " + entity + " like";
        std::string reference = fact;
        if (!filler.empty()) reference += " and " + filler[rng.below(filler.size())];
        in.references.push_back(std::move(reference));
        in.gold_answer = fact;
        in.latent = entity + " " + attribute;
        out.push_back(std::move(in));
    }
    return out;
}

}  // namespace pragrank
