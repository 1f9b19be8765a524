#pragma once

namespace snlp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace snlp
