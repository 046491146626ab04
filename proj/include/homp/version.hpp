#pragma once

namespace homp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace homp
