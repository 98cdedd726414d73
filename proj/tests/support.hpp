#pragma once

#include <random>
#include <string>

#include "gfm/gfm.hpp"

namespace gfm::test {

inline std::string scenario_path(const std::string& name) { return std::string(GFM_SCENARIO_DIR) + "/" + name; }

inline Scenario golden(const std::string& name) { return load_scenario(scenario_path(name + ".toml")); }

/// Fixed-seed generator so failures reproduce.
inline std::mt19937_64 rng(unsigned long long salt = 0) { return std::mt19937_64{0x5eed0000ULL + salt}; }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>{lo, hi}(g);
}

}  // namespace gfm::test
