#pragma once

#include <string_view>

namespace pragrank::detail {

// Text files from core/assets compiled into the library, keyed by their path
// relative to that directory ("toy_corpus.txt", "prompts/summarize.user.txt").
// Throws IoError for unknown names.
std::string_view embedded_asset(std::string_view name);

}  // namespace pragrank::detail
