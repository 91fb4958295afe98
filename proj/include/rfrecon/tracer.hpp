#pragma once
// Deterministic image-method multipath tracer for the RIS-coated room.
//
// Enumerated paths per receive antenna:
//   - line of sight,
//   - specular wall/RIS sequences up to max_reflections bounces,
//   - paths with exactly one sphere bounce (geometric-optics specular point)
//     plus wall/RIS bounces before/after, total interactions <= max_reflections.
// Paths crossing an opaque sphere are removed. Each path carries delay,
// arrival angles and a 2x2 polarimetric Jones matrix composed of free-space
// spreading, Fresnel coefficients per bounce in the local TE/TM frame, RIS
// panel phases, and a sphere curvature divergence factor.

#include <complex>
#include <cstdint>
#include <vector>

#include "rfrecon/codebook.hpp"
#include "rfrecon/scene.hpp"
#include "rfrecon/sim.hpp"

namespace rfrecon {

using cplx = std::complex<double>;

// Rows = receive polarization (h, v), columns = transmit polarization.
struct Jones {
    cplx hh{0.0, 0.0}, hv{0.0, 0.0}, vh{0.0, 0.0}, vv{0.0, 0.0};
};

struct Interaction {
    enum class Kind : std::uint8_t { wall = 0, ris_panel = 1, sphere = 2 };
    Kind kind = Kind::wall;
    int id = 0;   // wall id / wall id / sphere index
    int sub = 0;  // ris: panel tile index on the wall (iu + nu*iv), else 0
};

struct PathComponent {
    int rx_antenna = 0;
    double delay = 0.0;        // s, = path_length / c0
    double azimuth = 0.0;      // rad, arrival direction (toward the source side)
    double elevation = 0.0;    // rad
    Jones jones;
    double path_length = 0.0;  // m, unfolded
    std::vector<Interaction> interactions;
    std::vector<Vec3> vertices;  // tx, bounce points..., antenna
};

using AntennaPaths = std::vector<PathComponent>;

// Paths for every antenna of config's rx grid under one codebook entry.
// sphere_materials resolves the scene's material class indices (it may be a
// re-indexed subset table; wall materials resolve by name from the config).
std::vector<AntennaPaths> trace_paths(const SceneRecord& scene, const SimulationConfig& config,
                                      const RISCodebook& codebook, int entry,
                                      const std::vector<MaterialSpec>& sphere_materials);

// Coherent per-polarization-pair sums of Eq.-style phasors plus complex
// Gaussian noise of variance noise_variance per sample (deterministic in
// noise_seed; a zero variance adds nothing).
std::vector<Jones> synthesize_wavefront(const std::vector<AntennaPaths>& paths,
                                        const SimulationConfig& config,
                                        std::uint64_t noise_seed);

// Specular reflection point on a sphere for external points a and b
// (the Alhazen problem). Returns false when no valid external bounce exists.
bool sphere_specular_point(const Vec3& a, const Vec3& b, const Vec3& center, double radius,
                           Vec3* point);

}  // namespace rfrecon
