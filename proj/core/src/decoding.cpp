#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "pragrank/backend.hpp"
#include "pragrank/error.hpp"
#include "pragrank/prompts.hpp"

namespace pragrank {

std::string_view to_string(DecodingMethod method) noexcept {
    switch (method) {
        case DecodingMethod::Greedy: return "greedy";
        case DecodingMethod::Beam: return "beam";
        case DecodingMethod::Standard: return "standard";
        case DecodingMethod::TopK: return "topk";
        case DecodingMethod::Nucleus: return "nucleus";
        case DecodingMethod::DiverseBeam: return "diverse_beam";
    }
    return "unknown";
}

DecodingMethod parse_decoding_method(std::string_view text) {
    for (auto m : {DecodingMethod::Greedy, DecodingMethod::Beam, DecodingMethod::Standard,
                   DecodingMethod::TopK, DecodingMethod::Nucleus, DecodingMethod::DiverseBeam}) {
        if (to_string(m) == text) return m;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown decoding method '" + std::string(text) + "'");
}

void validate(const DecodingSpec& spec) {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
    if (!(spec.temperature > 0.0) || !std::isfinite(spec.temperature)) {
        fail("temperature must be > 0");
    }
    if (spec.max_new_tokens == 0) fail("max_new_tokens must be >= 1");
    const bool beam = spec.method == DecodingMethod::Beam ||
                      spec.method == DecodingMethod::DiverseBeam;
    if (beam != spec.beam_size.has_value()) {
        fail(beam ? "beam decoding requires beam_size" : "beam_size is only valid for beam decoding");
    }
    if (spec.beam_size && *spec.beam_size == 0) fail("beam_size must be >= 1");
    if ((spec.method == DecodingMethod::TopK) != spec.k.has_value()) {
        fail(spec.k ? "k is only valid for top-k sampling" : "top-k sampling requires k");
    }
    if (spec.k && *spec.k == 0) fail("k must be >= 1");
    if ((spec.method == DecodingMethod::Nucleus) != spec.p.has_value()) {
        fail(spec.p ? "p is only valid for nucleus sampling" : "nucleus sampling requires p");
    }
    if (spec.p && !(*spec.p > 0.0 && *spec.p <= 1.0)) fail("p must lie in (0, 1]");
    if (spec.method != DecodingMethod::DiverseBeam &&
        (spec.num_groups || spec.diversity_penalty)) {
        fail("num_groups/diversity_penalty are only valid for diverse beam search");
    }
}

namespace {

double to_real(std::string_view key, std::string_view value) {
    try {
        std::size_t used = 0;
        const std::string s(value);
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::InvalidArgument,
                "decoding parameter '" + std::string(key) + "' is not a number");
}

std::uint64_t to_uint(std::string_view key, std::string_view value) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw Error(ErrorCode::InvalidArgument,
                    "decoding parameter '" + std::string(key) + "' is not a non-negative integer");
    }
    return v;
}

// Shortest "%.*g" form that reads back to the same double.
std::string short_real(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace

DecodingSpec parse_decoding(std::string_view text, DecodingSpec base) {
    DecodingSpec spec = base;
    spec.beam_size.reset();
    spec.k.reset();
    spec.p.reset();
    spec.num_groups.reset();
    spec.diversity_penalty.reset();

    std::size_t pos = text.find(',');
    spec.method = parse_decoding_method(text.substr(0, pos));
    while (pos != std::string_view::npos) {
        const std::size_t next = text.find(',', pos + 1);
        const std::string_view item = text.substr(pos + 1, next - pos - 1);
        pos = next;
        const std::size_t eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::InvalidArgument,
                        "decoding parameter '" + std::string(item) + "' must be key=value");
        }
        const std::string_view key = item.substr(0, eq);
        const std::string_view value = item.substr(eq + 1);
        if (key == "temp" || key == "temperature") {
            spec.temperature = to_real(key, value);
        } else if (key == "p") {
            spec.p = to_real(key, value);
        } else if (key == "k") {
            spec.k = static_cast<std::uint32_t>(to_uint(key, value));
        } else if (key == "beam_size" || key == "beams") {
            spec.beam_size = static_cast<std::uint32_t>(to_uint(key, value));
        } else if (key == "num_groups") {
            spec.num_groups = static_cast<std::uint32_t>(to_uint(key, value));
        } else if (key == "diversity_penalty") {
            spec.diversity_penalty = to_real(key, value);
        } else if (key == "max_new_tokens") {
            spec.max_new_tokens = static_cast<std::uint32_t>(to_uint(key, value));
        } else if (key == "seed") {
            spec.seed = to_uint(key, value);
        } else {
            throw Error(ErrorCode::InvalidArgument,
                        "unknown decoding parameter '" + std::string(key) + "'");
        }
    }
    validate(spec);
    return spec;
}

std::string describe(const DecodingSpec& spec) {
    std::string out(to_string(spec.method));
    if (spec.beam_size) out += ",beam_size=" + std::to_string(*spec.beam_size);
    if (spec.k) out += ",k=" + std::to_string(*spec.k);
    if (spec.p) out += ",p=" + short_real(*spec.p);
    if (spec.num_groups) out += ",num_groups=" + std::to_string(*spec.num_groups);
    if (spec.diversity_penalty) out += ",diversity_penalty=" + short_real(*spec.diversity_penalty);
    out += ",temp=" + short_real(spec.temperature);
    out += ",max_new_tokens=" + std::to_string(spec.max_new_tokens);
    out += ",seed=" + std::to_string(spec.seed);
    return out;
}

ScoredText answer(const Backend& backend, std::string_view source, std::string_view query,
                  std::uint32_t beam_size, std::uint32_t max_new_tokens) {
    static const PromptSet prompts = PromptSet::builtin();
    return answer(backend, prompts, source, query, beam_size, max_new_tokens);
}

}  // namespace pragrank
