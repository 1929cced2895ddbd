#pragma once

// Internal JSON helpers shared by the serializers, the HTTP client and the
// report writers. Not installed.

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "pragrank/types.hpp"

namespace pragrank::detail {

using Json = nlohmann::ordered_json;

// Compact single-line dump with reals written as %.17g and keys in insertion order.
std::string dump_canonical(const Json& value);

// Real number with 17 significant digits; -inf becomes the quoted string "-inf".
Json log_score_to_json(double value);
double log_score_from_json(const Json& value, std::string_view field);

Json parse_json(std::string_view text, std::string_view what);

// Typed field access raising SchemaError with the field name.
const Json& require(const Json& object, std::string_view field);
std::string require_string(const Json& object, std::string_view field);
std::optional<std::string> optional_string(const Json& object, std::string_view field);
double require_number(const Json& object, std::string_view field);

// Collect members not listed in `known` for round-trip preservation.
ExtraFields collect_extra(const Json& object, std::initializer_list<std::string_view> known);
void append_extra(Json& object, const ExtraFields& extra);

}  // namespace pragrank::detail
