#pragma once
// Closed-form sphere geometry: volumes, lens intersections, minimal enclosing
// sphere of a pair, and the sphere-adapted generalized IoU with analytic
// gradients. Everything is double precision; branch classification uses a
// 1e-12 m tolerance and gradients at branch seams are the one-sided limits of
// the active branch (flagged in the result).

#include <array>

#include "rfrecon/geometry.hpp"

namespace rfrecon {

struct Sphere {
    Vec3 center;
    double radius = 0.0;  // meters, > 0
};

// Throws invalid_input on non-finite or non-positive radius.
void validate_sphere(const Sphere& s);

double sphere_volume(const Sphere& s);

// 0 when disjoint, the smaller volume when contained, spherical-lens volume otherwise.
double intersection_volume(const Sphere& a, const Sphere& b);

// Smallest sphere containing both. Containment branch returns the larger sphere.
Sphere min_enclosing_sphere(const Sphere& a, const Sphere& b);

struct GiouResult {
    double iou = 0.0;          // in [0, 1]
    double giou = 0.0;         // in (-1, 1]
    double volume_intersection = 0.0;
    double volume_union = 0.0;
    double volume_enclosing = 0.0;
    // d(giou)/d(ax, ay, az, ar, bx, by, bz, br)
    std::array<double, 8> gradient{};
    // True within 1e-12 m of a branch seam (d = ra+rb, d = |ra-rb|, d = 0);
    // the gradient there is the one-sided limit of the active branch.
    bool on_branch_boundary = false;
};

GiouResult giou(const Sphere& a, const Sphere& b);

struct GiouLoss {
    double loss = 0.0;  // 1 - giou, in [0, 2)
    std::array<double, 8> gradient{};
    bool on_branch_boundary = false;
};

GiouLoss giou_loss(const Sphere& a, const Sphere& b);

}  // namespace rfrecon
