// Helpers for locating shipped preset data in tests.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "k3f/finqform.hpp"
#include "k3f/genus.hpp"
#include "k3f/lattice.hpp"
#include "k3f/report.hpp"

inline std::string data_path(const std::string& rel) { return std::string(K3F_DATA_DIR) + "/" + rel; }

inline k3f::GramLattice preset_T(const std::string& name) {
    return k3f::read_lattice_file(data_path("presets/" + name + "/T.txt"));
}

inline std::vector<k3f::FiniteIsometry> preset_isometries(const std::string& name, const std::string& file, int k) {
    return k3f::read_isometries(data_path("presets/" + name + "/" + file), k);
}

// Frame genus of a preset, walked once per test binary.
inline const k3f::GenusList& preset_genus(const std::string& name) {
    static std::map<std::string, k3f::GenusList> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, k3f::enumerate_genus(k3f::load_preset(name).seed)).first;
    return it->second;
}
