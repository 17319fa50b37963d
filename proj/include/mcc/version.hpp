#pragma once

namespace mcc {

inline constexpr const char* kVersion = "mcchain 0.1.0";

}  // namespace mcc
