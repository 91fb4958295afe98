#pragma once
// Ground-truth scene generation: material-labeled spheres whose centers come
// from Bridson Poisson-disk sampling inside the configured bounds.

#include <cstdint>
#include <vector>

#include "rfrecon/geometry.hpp"
#include "rfrecon/materials.hpp"
#include "rfrecon/spheres.hpp"

namespace rfrecon {

struct SpherePrimitive {
    Sphere sphere;
    int material_class = 0;  // class_index into the scene's material table
};

struct SceneRecord {
    std::vector<SpherePrimitive> spheres;
    std::uint64_t rng_seed = 0;
    Aabb bounds;             // center bounds
    double min_separation = 0.0;
};

struct SceneGenParams {
    int sphere_count = 12;
    Aabb bounds{{-1.5, -3.5, 1.75}, {1.5, 3.5, 2.25}};
    double radius_min = 0.25;
    double radius_max = 0.5;
    double min_separation = 1.0;  // 2 * radius_max: spheres never overlap
    int bridson_attempts = 30;    // candidate attempts per active point (k)
    std::vector<MaterialSpec> materials = material_table_default();
};

// Deterministic in `seed`. Throws infeasible_placement when the packing
// heuristic rejects the request or Bridson's active list empties before
// sphere_count points are placed.
SceneRecord generate_scene(std::uint64_t seed, const SceneGenParams& params);

}  // namespace rfrecon
