#pragma once

namespace weaklim {
inline constexpr const char* kVersion = "0.1.0";
}
