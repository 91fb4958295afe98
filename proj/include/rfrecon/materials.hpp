#pragma once

#include <complex>
#include <string>
#include <vector>

#include "rfrecon/errors.hpp"

namespace rfrecon {

inline constexpr double kSpeedOfLight = 299792458.0;       // m/s
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m

struct MaterialSpec {
    std::string name;
    double rel_permittivity = 1.0;  // eps'
    double conductivity = 0.0;      // S/m
    int class_index = 0;            // 1..L, dense
};

// eps = eps' - j * sigma / (2 pi f eps0)
inline std::complex<double> complex_permittivity(const MaterialSpec& m, double freq_hz) {
    double eps_imag = m.conductivity / (2.0 * M_PI * freq_hz * kVacuumPermittivity);
    return {m.rel_permittivity, -eps_imag};
}

inline std::vector<MaterialSpec> material_table_default() {
    return {
        {"brick", 3.91, 0.028, 1},
        {"wood", 1.99, 0.014, 2},
        {"glass", 6.31, 0.014, 3},
        {"ceiling-board", 1.48, 0.003, 4},
        {"metal", 1.00, 1e7, 5},
    };
}

inline const MaterialSpec& material_by_name(const std::vector<MaterialSpec>& table,
                                            const std::string& name) {
    for (const auto& m : table)
        if (m.name == name) return m;
    throw invalid_input("unknown material: " + name);
}

inline const MaterialSpec& material_by_class(const std::vector<MaterialSpec>& table, int cls) {
    for (const auto& m : table)
        if (m.class_index == cls) return m;
    throw invalid_input("unknown material class " + std::to_string(cls));
}

// Sub-table with the named materials, class indices re-packed to {1..n}.
inline std::vector<MaterialSpec> material_subset(const std::vector<MaterialSpec>& table,
                                                 const std::vector<std::string>& names) {
    std::vector<MaterialSpec> out;
    for (const auto& n : names) {
        MaterialSpec m = material_by_name(table, n);
        m.class_index = int(out.size()) + 1;
        out.push_back(m);
    }
    return out;
}

}  // namespace rfrecon
