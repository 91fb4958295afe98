#pragma once
// RIS codebook: each entry assigns every 1x1 panel a steering direction,
// realized on reflection as a linear phase profile (generalized reflection
// law). A panel steered along its own normal has zero phase gradient and acts
// as a plain (metal-backed) reflector.

#include <cstdint>
#include <vector>

#include "rfrecon/sim.hpp"

namespace rfrecon {

struct PanelRef {
    int wall = 0;       // wall id
    int iu = 0, iv = 0; // tile coordinates on the wall
    Vec3 center;
    Vec3 normal;        // wall inward normal
};

// Flattened panel list over all RIS walls, in wall order then iv-major tiles.
std::vector<PanelRef> build_panels(const SimulationConfig& config);

struct RISCodebook {
    std::vector<PanelRef> panels;
    // entries[c][p] = steering direction (unit, into the room) for panel p
    std::vector<std::vector<Vec3>> entries;
    std::uint64_t seed = 0;

    int n_entries() const { return int(entries.size()); }

    // In-plane phase-gradient vector for panel p under entry c:
    // grad = k0 * tangential(steer); phase at x is dot(grad, x - center).
    Vec3 phase_gradient(int entry, int panel, double k0) const {
        const PanelRef& pr = panels[std::size_t(panel)];
        const Vec3& s = entries[std::size_t(entry)][std::size_t(panel)];
        Vec3 t = s - dot(s, pr.normal) * pr.normal;
        return k0 * t;
    }
};

// Deterministic in `seed`. Every panel owns `realizations_per_panel`
// independently drawn hemisphere directions; entry c uses realization
// (c mod realizations_per_panel) of every panel.
RISCodebook build_codebook(std::uint64_t seed, int n_entries, int realizations_per_panel,
                           const SimulationConfig& config);

// All panels steered along their normals: zero phase gradients everywhere.
RISCodebook neutral_codebook(const SimulationConfig& config);

}  // namespace rfrecon
