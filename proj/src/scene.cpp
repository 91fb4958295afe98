#include "rfrecon/scene.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rfrecon/rng.hpp"

namespace rfrecon {

namespace {

// Random-sequential-adsorption style capacity estimate; Bridson saturates a
// box well above this, so rejecting here catches hopeless requests early.
double packing_capacity(const Aabb& bounds, double sep) {
    Vec3 e = bounds.extent();
    return 0.55 * (e.x / sep + 1.0) * (e.y / sep + 1.0) * (e.z / sep + 1.0);
}

struct BridsonGrid {
    BridsonGrid(const Aabb& bounds, double sep) : bounds_(bounds), sep_(sep) {
        cell_ = sep / std::sqrt(3.0);
        Vec3 e = bounds.extent();
        nx_ = std::max<int>(1, int(std::ceil(e.x / cell_)));
        ny_ = std::max<int>(1, int(std::ceil(e.y / cell_)));
        nz_ = std::max<int>(1, int(std::ceil(e.z / cell_)));
        cells_.assign(std::size_t(nx_) * ny_ * nz_, -1);
    }

    void cell_of(const Vec3& p, int& ix, int& iy, int& iz) const {
        ix = std::min(nx_ - 1, int((p.x - bounds_.min.x) / cell_));
        iy = std::min(ny_ - 1, int((p.y - bounds_.min.y) / cell_));
        iz = std::min(nz_ - 1, int((p.z - bounds_.min.z) / cell_));
    }

    bool far_enough(const Vec3& p, const std::vector<Vec3>& points) const {
        int cx, cy, cz;
        cell_of(p, cx, cy, cz);
        for (int ix = std::max(0, cx - 2); ix <= std::min(nx_ - 1, cx + 2); ++ix)
            for (int iy = std::max(0, cy - 2); iy <= std::min(ny_ - 1, cy + 2); ++iy)
                for (int iz = std::max(0, cz - 2); iz <= std::min(nz_ - 1, cz + 2); ++iz) {
                    int idx = cells_[(std::size_t(ix) * ny_ + iy) * nz_ + iz];
                    if (idx >= 0 && norm(points[std::size_t(idx)] - p) < sep_) return false;
                }
        return true;
    }

    void insert(const Vec3& p, int index) {
        int cx, cy, cz;
        cell_of(p, cx, cy, cz);
        cells_[(std::size_t(cx) * ny_ + cy) * nz_ + cz] = index;
    }

    Aabb bounds_;
    double sep_, cell_;
    int nx_, ny_, nz_;
    std::vector<int> cells_;  // one point per cell with cell = sep/sqrt(3)
};

// Volume-uniform sample in the spherical annulus [sep, 2*sep] around `center`.
Vec3 annulus_sample(Rng& rng, const Vec3& center, double sep) {
    double u = rng.uniform();
    double r = std::cbrt(sep * sep * sep * (1.0 + 7.0 * u));  // (2sep)^3 = 8 sep^3
    return center + r * rng.unit_sphere();
}

}  // namespace

SceneRecord generate_scene(std::uint64_t seed, const SceneGenParams& params) {
    const int target = params.sphere_count;
    if (target < 1) throw invalid_input("sphere_count must be >= 1");
    if (params.radius_min <= 0.0 || params.radius_max < params.radius_min)
        throw invalid_input("bad radius range");
    if (params.materials.empty()) throw invalid_input("empty material table");
    if (double(target) > packing_capacity(params.bounds, params.min_separation))
        throw infeasible_placement("requested " + std::to_string(target) +
                                   " spheres exceed the packing capacity of the bounds");

    Rng rng(seed);
    BridsonGrid grid(params.bounds, params.min_separation);
    std::vector<Vec3> points;
    std::vector<int> active;

    SceneRecord record;
    record.rng_seed = seed;
    record.bounds = params.bounds;
    record.min_separation = params.min_separation;

    auto accept = [&](const Vec3& p) {
        int idx = int(points.size());
        points.push_back(p);
        grid.insert(p, idx);
        active.push_back(idx);
        SpherePrimitive prim;
        prim.sphere.center = p;
        prim.sphere.radius = rng.uniform(params.radius_min, params.radius_max);
        prim.material_class =
            params.materials[rng.uniform_index(params.materials.size())].class_index;
        record.spheres.push_back(prim);
    };

    accept(rng.in_box(params.bounds));

    while (int(points.size()) < target) {
        if (active.empty())
            throw infeasible_placement("Bridson active list exhausted after " +
                                       std::to_string(points.size()) + " of " +
                                       std::to_string(target) + " spheres");
        std::size_t slot = rng.uniform_index(active.size());
        const Vec3 base = points[std::size_t(active[slot])];
        bool placed = false;
        for (int attempt = 0; attempt < params.bridson_attempts; ++attempt) {
            Vec3 cand = annulus_sample(rng, base, params.min_separation);
            if (!params.bounds.contains(cand)) continue;
            if (!grid.far_enough(cand, points)) continue;
            accept(cand);
            placed = true;
            break;
        }
        if (!placed) {
            active[slot] = active.back();
            active.pop_back();
        }
    }

    return record;
}

}  // namespace rfrecon
