#pragma once

namespace gazekit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gazekit
