#pragma once

namespace bravo {

inline constexpr const char* kEngineVersion = "1.0.0";

}  // namespace bravo
