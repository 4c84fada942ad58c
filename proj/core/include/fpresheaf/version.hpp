#pragma once

namespace fpre {

inline constexpr const char* kVersion = "0.1.0";

} // namespace fpre
