#pragma once

namespace sclaw {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sclaw
