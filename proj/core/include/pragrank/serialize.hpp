#pragma once

// JSONL encoding of the shared records.
//
// Reals are written with 17 significant digits (printf "%.17g"), which is
// enough for an exact double round-trip. Negative infinity is written as the
// quoted string "-inf". Keys are emitted in a fixed order, followed by any
// unknown members carried over from the input.

#include <string>
#include <string_view>

#include "pragrank/types.hpp"

namespace pragrank {

inline constexpr std::string_view kNegInfToken = "-inf";

// "%.17g" for finite values; "-inf" / "inf" / "nan" otherwise.
std::string format_real(double value);

std::string encode(const Instance& instance);
std::string encode(const CandidatePool& pool);
std::string encode(const SelectorConfig& config);
std::string encode(const Selection& selection);

// Decoders validate the record and throw Error(SchemaError) on violations.
Instance decode_instance(std::string_view line);
CandidatePool decode_pool(std::string_view line);
SelectorConfig decode_selector_config(std::string_view json);
Selection decode_selection(std::string_view line);

}  // namespace pragrank
