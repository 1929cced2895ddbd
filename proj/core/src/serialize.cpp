#include "pragrank/serialize.hpp"

#include <cmath>
#include <cstdio>

#include "json_util.hpp"
#include "pragrank/error.hpp"

namespace pragrank {

using detail::Json;

std::string format_real(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value < 0 ? "-inf" : "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

Json instance_json(const Instance& in) {
    Json j = Json::object();
    j["id"] = in.id;
    j["source"] = in.source;
    j["query"] = in.query;
    j["references"] = in.references;
    if (in.gold_answer) j["gold_answer"] = *in.gold_answer;
    if (in.latent) j["latent"] = *in.latent;
    detail::append_extra(j, in.extra);
    return j;
}

void put_score(Json& j, const char* key, const std::optional<double>& v) {
    if (v) j[key] = detail::log_score_to_json(*v);
}

std::optional<double> get_score(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return detail::log_score_from_json(*it, key);
}

Json config_json(const SelectorConfig& c) {
    Json j = Json::object();
    j["rule"] = std::string(to_string(c.rule));
    j["lambda"] = c.lambda;
    j["alpha"] = c.alpha;
    if (c.seed) j["seed"] = *c.seed;
    if (c.oracle_metric) j["oracle_metric"] = *c.oracle_metric;
    return j;
}

SelectorConfig config_from(const Json& j) {
    SelectorConfig c;
    c.rule = parse_rule(detail::require_string(j, "rule"));
    c.lambda = detail::require_number(j, "lambda");
    c.alpha = detail::require_number(j, "alpha");
    if (auto it = j.find("seed"); it != j.end() && !it->is_null()) {
        if (!it->is_number_unsigned()) {
            throw Error(ErrorCode::SchemaError, "field 'seed' must be a non-negative integer");
        }
        c.seed = it->get<std::uint64_t>();
    }
    c.oracle_metric = detail::optional_string(j, "oracle_metric");
    validate(c);
    return c;
}

}  // namespace

std::string encode(const Instance& instance) {
    return detail::dump_canonical(instance_json(instance));
}

std::string encode(const CandidatePool& pool) {
    Json j = Json::object();
    j["instance_id"] = pool.instance_id;
    if (pool.answer) j["answer"] = *pool.answer;
    Json cands = Json::array();
    for (const auto& c : pool.candidates) {
        Json cj = Json::object();
        cj["text"] = c.text;
        put_score(cj, "logp_s0", c.logp_s0);
        put_score(cj, "logp_answer_rec", c.logp_answer_rec);
        put_score(cj, "logp_source_rec", c.logp_source_rec);
        put_score(cj, "logp_latent_rec", c.logp_latent_rec);
        detail::append_extra(cj, c.extra);
        cands.push_back(std::move(cj));
    }
    j["candidates"] = std::move(cands);
    detail::append_extra(j, pool.extra);
    return detail::dump_canonical(j);
}

std::string encode(const SelectorConfig& config) {
    return detail::dump_canonical(config_json(config));
}

std::string encode(const Selection& s) {
    Json j = Json::object();
    j["instance_id"] = s.instance_id;
    j["rule"] = config_json(s.config);
    j["chosen_index"] = s.chosen_index;
    if (s.combined_scores) {
        Json arr = Json::array();
        for (double v : *s.combined_scores) arr.push_back(detail::log_score_to_json(v));
        j["combined_scores"] = std::move(arr);
    }
    return detail::dump_canonical(j);
}

Instance decode_instance(std::string_view line) {
    const Json j = detail::parse_json(line, "instance record");
    Instance in;
    in.id = detail::require_string(j, "id");
    in.source = detail::require_string(j, "source");
    in.query = detail::require_string(j, "query");
    const Json& refs = detail::require(j, "references");
    if (!refs.is_array()) throw Error(ErrorCode::SchemaError, "field 'references' must be an array");
    for (const auto& r : refs) {
        if (!r.is_string()) {
            throw Error(ErrorCode::SchemaError, "field 'references' must contain only strings");
        }
        in.references.push_back(r.get<std::string>());
    }
    in.gold_answer = detail::optional_string(j, "gold_answer");
    in.latent = detail::optional_string(j, "latent");
    in.extra = detail::collect_extra(
        j, {"id", "source", "query", "references", "gold_answer", "latent"});
    validate(in);
    return in;
}

CandidatePool decode_pool(std::string_view line) {
    const Json j = detail::parse_json(line, "pool record");
    CandidatePool pool;
    pool.instance_id = detail::require_string(j, "instance_id");
    pool.answer = detail::optional_string(j, "answer");
    const Json& cands = detail::require(j, "candidates");
    if (!cands.is_array()) throw Error(ErrorCode::SchemaError, "field 'candidates' must be an array");
    for (const auto& cj : cands) {
        Candidate c;
        c.text = detail::require_string(cj, "text");
        c.logp_s0 = get_score(cj, "logp_s0");
        c.logp_answer_rec = get_score(cj, "logp_answer_rec");
        c.logp_source_rec = get_score(cj, "logp_source_rec");
        c.logp_latent_rec = get_score(cj, "logp_latent_rec");
        c.extra = detail::collect_extra(
            cj, {"text", "logp_s0", "logp_answer_rec", "logp_source_rec", "logp_latent_rec"});
        pool.candidates.push_back(std::move(c));
    }
    pool.extra = detail::collect_extra(j, {"instance_id", "answer", "candidates"});
    validate(pool);
    return pool;
}

SelectorConfig decode_selector_config(std::string_view json) {
    return config_from(detail::parse_json(json, "selector config"));
}

Selection decode_selection(std::string_view line) {
    const Json j = detail::parse_json(line, "selection record");
    Selection s;
    s.instance_id = detail::require_string(j, "instance_id");
    s.config = config_from(detail::require(j, "rule"));
    const Json& idx = detail::require(j, "chosen_index");
    if (!idx.is_number_unsigned()) {
        throw Error(ErrorCode::SchemaError, "field 'chosen_index' must be a non-negative integer");
    }
    s.chosen_index = idx.get<std::size_t>();
    if (auto it = j.find("combined_scores"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) {
            throw Error(ErrorCode::SchemaError, "field 'combined_scores' must be an array");
        }
        std::vector<double> scores;
        for (const auto& v : *it) scores.push_back(detail::log_score_from_json(v, "combined_scores"));
        if (s.chosen_index >= scores.size()) {
            throw Error(ErrorCode::SchemaError, "field 'chosen_index' out of range");
        }
        s.combined_scores = std::move(scores);
    }
    return s;
}

}  // namespace pragrank
