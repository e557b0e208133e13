#pragma once

namespace qmpemba {

inline constexpr const char* kEngineVersion = "1.0.0";

}  // namespace qmpemba
