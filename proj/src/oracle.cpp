#include "rfrecon/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rfrecon/rng.hpp"

namespace rfrecon::oracle {

McEstimate mc_intersection_volume(const Sphere& a, const Sphere& b, long samples,
                                  std::uint64_t seed) {
    McEstimate est;
    est.samples = samples;
    Vec3 lo{std::max(a.center.x - a.radius, b.center.x - b.radius),
            std::max(a.center.y - a.radius, b.center.y - b.radius),
            std::max(a.center.z - a.radius, b.center.z - b.radius)};
    Vec3 hi{std::min(a.center.x + a.radius, b.center.x + b.radius),
            std::min(a.center.y + a.radius, b.center.y + b.radius),
            std::min(a.center.z + a.radius, b.center.z + b.radius)};
    if (hi.x <= lo.x || hi.y <= lo.y || hi.z <= lo.z) return est;  // disjoint boxes

    Aabb box{lo, hi};
    const double vbox = box.volume();
    Rng rng(seed);
    long hits = 0;
    const double ra2 = a.radius * a.radius;
    const double rb2 = b.radius * b.radius;
    for (long i = 0; i < samples; ++i) {
        Vec3 p = rng.in_box(box);
        if (norm2(p - a.center) <= ra2 && norm2(p - b.center) <= rb2) ++hits;
    }
    double frac = double(hits) / double(samples);
    est.volume = frac * vbox;
    est.sigma = vbox * std::sqrt(frac * (1.0 - frac) / double(samples));
    return est;
}

namespace {

double assign_rec(const std::vector<double>& cost, int n_rows, int n_cols, int row,
                  std::vector<char>& used_col) {
    if (row == n_rows) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_cols; ++c) {
        if (used_col[std::size_t(c)]) continue;
        used_col[std::size_t(c)] = 1;
        double v = cost[std::size_t(row) * n_cols + std::size_t(c)] +
                   assign_rec(cost, n_rows, n_cols, row + 1, used_col);
        used_col[std::size_t(c)] = 0;
        best = std::min(best, v);
    }
    return best;
}

}  // namespace

double brute_force_assignment_cost(const std::vector<double>& cost, int n_rows, int n_cols) {
    if (n_rows == 0 || n_cols == 0) return 0.0;
    if (n_rows <= n_cols) {
        std::vector<char> used(std::size_t(n_cols), 0);
        return assign_rec(cost, n_rows, n_cols, 0, used);
    }
    // Transpose so every column of the original gets a row.
    std::vector<double> t(cost.size());
    for (int r = 0; r < n_rows; ++r)
        for (int c = 0; c < n_cols; ++c)
            t[std::size_t(c) * n_rows + std::size_t(r)] =
                cost[std::size_t(r) * n_cols + std::size_t(c)];
    std::vector<char> used(std::size_t(n_rows), 0);
    return assign_rec(t, n_cols, n_rows, 0, used);
}

}  // namespace rfrecon::oracle
