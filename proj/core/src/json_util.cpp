#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pragrank/error.hpp"
#include "pragrank/serialize.hpp"

namespace pragrank::detail {

namespace {

void dump_into(const Json& value, std::string& out) {
    switch (value.type()) {
        case Json::value_t::object: {
            out.push_back('{');
            bool first = true;
            for (auto it = value.begin(); it != value.end(); ++it) {
                if (!first) out.push_back(',');
                first = false;
                out += Json(it.key()).dump(-1, ' ', false, Json::error_handler_t::replace);
                out.push_back(':');
                dump_into(it.value(), out);
            }
            out.push_back('}');
            break;
        }
        case Json::value_t::array: {
            out.push_back('[');
            bool first = true;
            for (const auto& item : value) {
                if (!first) out.push_back(',');
                first = false;
                dump_into(item, out);
            }
            out.push_back(']');
            break;
        }
        case Json::value_t::number_float: {
            const double v = value.get<double>();
            if (std::isfinite(v)) {
                out += format_real(v);
            } else {
                out += '"' + format_real(v) + '"';
            }
            break;
        }
        default:
            out += value.dump(-1, ' ', false, Json::error_handler_t::replace);
            break;
    }
}

}  // namespace

std::string dump_canonical(const Json& value) {
    std::string out;
    dump_into(value, out);
    return out;
}

Json log_score_to_json(double value) {
    if (std::isinf(value) && value < 0) return Json(kNegInfToken);
    return Json(value);
}

double log_score_from_json(const Json& value, std::string_view field) {
    if (value.is_string() && value.get<std::string>() == kNegInfToken) {
        return -std::numeric_limits<double>::infinity();
    }
    if (!value.is_number()) {
        throw Error(ErrorCode::SchemaError,
                    "field '" + std::string(field) + "' must be a number or \"-inf\"");
    }
    return value.get<double>();
}

Json parse_json(std::string_view text, std::string_view what) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::SchemaError,
                    "malformed JSON in " + std::string(what) + ": " + e.what());
    }
}

const Json& require(const Json& object, std::string_view field) {
    if (!object.is_object()) throw Error(ErrorCode::SchemaError, "record is not a JSON object");
    auto it = object.find(field);
    if (it == object.end()) {
        throw Error(ErrorCode::SchemaError, "missing field '" + std::string(field) + "'");
    }
    return *it;
}

std::string require_string(const Json& object, std::string_view field) {
    const Json& v = require(object, field);
    if (!v.is_string()) {
        throw Error(ErrorCode::SchemaError, "field '" + std::string(field) + "' must be a string");
    }
    return v.get<std::string>();
}

std::optional<std::string> optional_string(const Json& object, std::string_view field) {
    auto it = object.find(field);
    if (it == object.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) {
        throw Error(ErrorCode::SchemaError, "field '" + std::string(field) + "' must be a string");
    }
    return it->get<std::string>();
}

double require_number(const Json& object, std::string_view field) {
    const Json& v = require(object, field);
    if (!v.is_number()) {
        throw Error(ErrorCode::SchemaError, "field '" + std::string(field) + "' must be a number");
    }
    return v.get<double>();
}

ExtraFields collect_extra(const Json& object, std::initializer_list<std::string_view> known) {
    ExtraFields extra;
    for (auto it = object.begin(); it != object.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) != known.end()) continue;
        extra.emplace_back(it.key(), dump_canonical(it.value()));
    }
    return extra;
}

void append_extra(Json& object, const ExtraFields& extra) {
    for (const auto& [key, raw] : extra) {
        if (object.contains(key)) continue;
        object[key] = Json::parse(raw);
    }
}

}  // namespace pragrank::detail
