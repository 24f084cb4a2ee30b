#pragma once

namespace gcv {
inline constexpr const char* kVersion = "0.1.0";
}
