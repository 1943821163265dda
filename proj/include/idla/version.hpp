#pragma once

namespace idla {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace idla
