#pragma once
// Shared helpers for the unit and acceptance suites.

#include <cmath>
#include <functional>

#include "rfrecon/sim.hpp"

namespace rfrecon::testutil {

// Golden-section minimization of a 1D unimodal function on [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo, double hi,
                         int iters = 200) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

// Brute-force minimizer of |tx - P(u,v)| + |P(u,v) - rx| over a wall rectangle
// by coordinate descent with golden sections (the length is convex in (u,v)).
inline Vec3 brute_force_wall_reflection(const Wall& w, const Vec3& tx, const Vec3& rx,
                                        int sweeps = 60) {
    double u = w.lu / 2.0, v = w.lv / 2.0;
    auto len = [&](double uu, double vv) {
        Vec3 p = w.origin + uu * w.u_axis + vv * w.v_axis;
        return norm(tx - p) + norm(p - rx);
    };
    for (int s = 0; s < sweeps; ++s) {
        u = golden_min([&](double uu) { return len(uu, v); }, 0.0, w.lu);
        v = golden_min([&](double vv) { return len(u, vv); }, 0.0, w.lv);
    }
    return w.origin + u * w.u_axis + v * w.v_axis;
}

// Angle between the incidence and reflection directions measured from the
// surface normal; returns |angle_in - angle_out|.
inline double reflection_law_error(const Vec3& before, const Vec3& point, const Vec3& after,
                                   const Vec3& normal) {
    Vec3 in_dir = normalized(point - before);
    Vec3 out_dir = normalized(after - point);
    double ai = std::acos(std::clamp(-dot(in_dir, normal), -1.0, 1.0));
    double ao = std::acos(std::clamp(dot(out_dir, normal), -1.0, 1.0));
    return std::abs(ai - ao);
}

}  // namespace rfrecon::testutil
