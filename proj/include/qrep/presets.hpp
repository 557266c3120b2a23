#pragma once

// Named operating points used throughout the docs and tests.

#include <span>
#include <stdexcept>
#include <string>

#include "qrep/core.hpp"

namespace qrep {

struct Preset {
    std::string name;
    LinkParams params;
    std::string note;
};

/// Built-in operating points:
///   soa             state-of-art hardware: p = 1e-4, beta = 0.135,
///                   p_s = 0.5, p_t = 1, tau_c = 0.1 ms (20 km segments)
///   nesting-low-ps  multi-level comparison point p = 0.02, beta = 0.2 with
///                   p_s = 0.5: the buffered protocol's advantage grows
///                   with every nesting level
///   nesting-high-ps same point with p_s = 0.75: the advantage grows much
///                   more slowly with the level
inline std::span<const Preset> presets() {
    static const Preset table[] = {
        {"soa", LinkParams::from_beta(1e-4, 0.5, 1.0, 0.135, 1e-4),
         "state-of-art hardware, 20 km segments"},
        {"nesting-low-ps", LinkParams::from_beta(0.02, 0.5, 1.0, 0.2, 1e-3),
         "multi-level comparison, low swap success"},
        {"nesting-high-ps", LinkParams::from_beta(0.02, 0.75, 1.0, 0.2, 1e-3),
         "multi-level comparison, high swap success"},
    };
    return table;
}

inline const Preset& find_preset(const std::string& name) {
    for (const auto& preset : presets())
        if (preset.name == name) return preset;
    throw std::invalid_argument("unknown preset: '" + name + "'");
}

}  // namespace qrep
