#pragma once

namespace sslab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sslab
