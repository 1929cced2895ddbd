#pragma once

#include <string_view>

namespace pragrank {

std::string_view version() noexcept;

}  // namespace pragrank
