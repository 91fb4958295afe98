#pragma once
// Independent oracles used by tests and the oracle-check CLI. These must not
// call the closed-form implementations they are checking.

#include <cstdint>
#include <vector>

#include "rfrecon/spheres.hpp"

namespace rfrecon::oracle {

struct McEstimate {
    double volume = 0.0;
    double sigma = 0.0;  // binomial standard error of the estimate
    long samples = 0;
};

// Box-sampling estimate of |A intersect B|: uniform points in the overlap of
// the two spheres' bounding boxes, counting points inside both.
McEstimate mc_intersection_volume(const Sphere& a, const Sphere& b, long samples,
                                  std::uint64_t seed);

// Exhaustive minimum assignment cost over all injective maps of the smaller
// side into the larger (row-major cost, n_rows x n_cols).
double brute_force_assignment_cost(const std::vector<double>& cost, int n_rows, int n_cols);

}  // namespace rfrecon::oracle
