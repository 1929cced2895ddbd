#include "pragrank/version.hpp"

namespace pragrank {

std::string_view version() noexcept { return PRAGRANK_VERSION; }

}  // namespace pragrank
