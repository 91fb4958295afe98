#include "rfrecon/codebook.hpp"

#include "rfrecon/errors.hpp"
#include "rfrecon/rng.hpp"

namespace rfrecon {

std::vector<PanelRef> build_panels(const SimulationConfig& config) {
    std::vector<PanelRef> panels;
    const double ps = config.panel_size;
    for (const Wall& w : build_walls(config)) {
        if (!w.ris) continue;
        for (int iv = 0; iv < w.nv; ++iv)
            for (int iu = 0; iu < w.nu; ++iu) {
                PanelRef p;
                p.wall = w.id;
                p.iu = iu;
                p.iv = iv;
                p.center = w.origin + w.u_axis * (w.margin_u + (iu + 0.5) * ps) +
                           w.v_axis * (w.margin_v + (iv + 0.5) * ps);
                p.normal = w.normal;
                panels.push_back(p);
            }
    }
    return panels;
}

RISCodebook build_codebook(std::uint64_t seed, int n_entries, int realizations_per_panel,
                           const SimulationConfig& config) {
    if (n_entries < 1) throw invalid_input("codebook needs at least one entry");
    if (realizations_per_panel < 1) throw invalid_input("realizations_per_panel must be >= 1");

    RISCodebook cb;
    cb.seed = seed;
    cb.panels = build_panels(config);

    Rng rng(derive_seed(seed, {0x636f6465626f6fULL}));  // codebook stream
    // pool[p][r]: independent steering directions into the room
    std::vector<std::vector<Vec3>> pool(cb.panels.size());
    for (std::size_t p = 0; p < cb.panels.size(); ++p) {
        pool[p].reserve(std::size_t(realizations_per_panel));
        for (int r = 0; r < realizations_per_panel; ++r)
            pool[p].push_back(rng.unit_hemisphere(cb.panels[p].normal));
    }

    cb.entries.resize(std::size_t(n_entries));
    for (int c = 0; c < n_entries; ++c) {
        auto& entry = cb.entries[std::size_t(c)];
        entry.reserve(cb.panels.size());
        for (std::size_t p = 0; p < cb.panels.size(); ++p)
            entry.push_back(pool[p][std::size_t(c % realizations_per_panel)]);
    }
    return cb;
}

RISCodebook neutral_codebook(const SimulationConfig& config) {
    RISCodebook cb;
    cb.panels = build_panels(config);
    cb.entries.resize(1);
    for (const PanelRef& p : cb.panels) cb.entries[0].push_back(p.normal);
    return cb;
}

}  // namespace rfrecon
