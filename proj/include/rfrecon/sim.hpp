#pragma once
// Room / radio configuration for the programmable wireless environment and the
// derived wall + antenna geometry used by the tracer and codebook.

#include <string>
#include <vector>

#include "rfrecon/geometry.hpp"
#include "rfrecon/materials.hpp"

namespace rfrecon {

struct SimulationConfig {
    Aabb room{{-3.25, -5.0, 0.0}, {3.25, 5.0, 4.0}};  // 6.5 x 10 x 4 m
    double f_c = 2.8e9;                                // Hz
    Vec3 tx_position{2.75, 4.5, 3.5};
    double tx_power_dbm = 0.0;
    Vec3 rx_center{0.0, -5.0, 2.0};   // wall-mounted array, x-z plane, facing +y
    int rx_grid_x = 8;
    int rx_grid_z = 8;
    double rx_pitch = 0.0;            // 0 = half wavelength
    int max_reflections = 4;          // total interactions per path; 0 disables reflections
    double noise_variance = -1.0;     // W; < 0 = auto (20 dB below LoS power at rx_center)
    double c0 = kSpeedOfLight;

    // Surfaces. Wall ids: 0 x-min, 1 x-max, 2 y-min, 3 y-max, 4 floor, 5 ceiling.
    std::string wall_material = "brick";
    std::string floor_material = "brick";
    std::string ceiling_material = "ceiling-board";
    std::vector<int> ris_walls{0, 1, 2, 3};  // vertical walls carry RIS tiling
    double panel_size = 1.0;                 // m, square panels
    int ris_max_hits = 2;                    // paths with more RIS-panel hits are dropped
    std::vector<MaterialSpec> material_table = material_table_default();

    double wavelength() const { return c0 / f_c; }
    double pitch() const { return rx_pitch > 0.0 ? rx_pitch : wavelength() / 2.0; }
    double tx_power_watts() const { return 1e-3 * std::pow(10.0, tx_power_dbm / 10.0); }
    int n_antennas() const { return rx_grid_x * rx_grid_z; }

    // Antenna n = iz * rx_grid_x + ix, grid centered on rx_center.
    std::vector<Vec3> antenna_positions() const {
        std::vector<Vec3> out;
        out.reserve(std::size_t(n_antennas()));
        const double p = pitch();
        const double ox = 0.5 * (rx_grid_x - 1);
        const double oz = 0.5 * (rx_grid_z - 1);
        for (int iz = 0; iz < rx_grid_z; ++iz)
            for (int ix = 0; ix < rx_grid_x; ++ix)
                out.push_back(rx_center + Vec3{(ix - ox) * p, 0.0, (iz - oz) * p});
        return out;
    }

    // Auto noise level: 20 dB below the LoS power at the array center.
    double resolved_noise_variance() const {
        if (noise_variance >= 0.0) return noise_variance;
        double d = norm(rx_center - tx_position);
        double amp = std::sqrt(tx_power_watts()) * wavelength() / (4.0 * M_PI * d);
        return amp * amp / 100.0;
    }

    void validate() const;
};

struct Wall {
    int id = 0;
    Vec3 origin;          // corner
    Vec3 u_axis, v_axis;  // unit, in-plane
    double lu = 0.0, lv = 0.0;
    Vec3 normal;          // unit, pointing into the room
    MaterialSpec material;
    bool ris = false;
    // RIS tiling (valid when ris): panel_size squares, centered, margins plain wall.
    int nu = 0, nv = 0;
    double margin_u = 0.0, margin_v = 0.0;
};

std::vector<Wall> build_walls(const SimulationConfig& config);

inline Vec3 reflect_point(const Vec3& p, const Wall& w) {
    double f = dot(p - w.origin, w.normal);
    return p - 2.0 * f * w.normal;
}

}  // namespace rfrecon
