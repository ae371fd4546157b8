#pragma once

namespace geotherm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace geotherm
