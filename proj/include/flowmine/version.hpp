#pragma once

namespace flowmine {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace flowmine
