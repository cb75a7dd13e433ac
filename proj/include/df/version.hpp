#pragma once

namespace df {

inline constexpr const char* kVersion = "0.1.0";

} // namespace df
