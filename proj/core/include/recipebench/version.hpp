#pragma once

namespace recipebench {

inline constexpr const char* kVersion = "0.1.0";

} // namespace recipebench
