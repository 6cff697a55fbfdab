#pragma once

namespace dppc {
inline constexpr const char* kVersion = "0.1.0";
}
