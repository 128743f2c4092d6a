#pragma once

namespace lzcd {
inline constexpr const char* kVersion = "0.1.0";
}
