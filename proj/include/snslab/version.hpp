#pragma once

namespace snslab {

inline constexpr const char* kVersion = "0.1.0";

}
