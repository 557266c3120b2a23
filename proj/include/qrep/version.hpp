#pragma once

namespace qrep {

inline constexpr const char* version = "0.1.0";

}  // namespace qrep
