#include "rfrecon/spheres.hpp"

#include <algorithm>
#include <cmath>

#include "rfrecon/errors.hpp"

namespace rfrecon {

namespace {

constexpr double kBranchTol = 1e-12;  // meters

// Branch layout shared by value and gradient code.
enum class Branch { disjoint, contained, lens };

struct PairGeometry {
    double d = 0.0;       // center distance
    Vec3 axis{};          // unit vector a->b, zero when d ~ 0
    double ra = 0.0, rb = 0.0;
    Branch branch = Branch::lens;
    bool boundary = false;
};

PairGeometry classify(const Sphere& a, const Sphere& b) {
    PairGeometry g;
    g.ra = a.radius;
    g.rb = b.radius;
    Vec3 delta = b.center - a.center;
    g.d = norm(delta);
    if (g.d > kBranchTol) g.axis = delta / g.d;

    const double sum = g.ra + g.rb;
    const double diff = std::abs(g.ra - g.rb);
    if (g.d >= sum) {
        g.branch = Branch::disjoint;
    } else if (g.d <= diff) {
        g.branch = Branch::contained;
    } else {
        g.branch = Branch::lens;
    }
    g.boundary = std::abs(g.d - sum) < kBranchTol || std::abs(g.d - diff) < kBranchTol ||
                 g.d < kBranchTol;
    return g;
}

double ball_volume(double r) { return (4.0 / 3.0) * M_PI * r * r * r; }

// Spherical-lens volume, valid in the lens branch.
double lens_volume(double d, double ra, double rb) {
    const double s = ra + rb;
    const double m = ra - rb;
    const double A = s - d;
    const double B = d * d + 2.0 * d * s - 3.0 * m * m;
    return M_PI * A * A * B / (12.0 * d);
}

}  // namespace

void validate_sphere(const Sphere& s) {
    if (!finite(s.center) || !std::isfinite(s.radius))
        throw invalid_input("sphere has non-finite fields");
    if (s.radius <= 0.0)
        throw invalid_input("sphere radius must be > 0");
}

double sphere_volume(const Sphere& s) {
    validate_sphere(s);
    return ball_volume(s.radius);
}

double intersection_volume(const Sphere& a, const Sphere& b) {
    validate_sphere(a);
    validate_sphere(b);
    PairGeometry g = classify(a, b);
    switch (g.branch) {
        case Branch::disjoint:
            return 0.0;
        case Branch::contained:
            return ball_volume(std::min(g.ra, g.rb));
        case Branch::lens:
            break;
    }
    double v = lens_volume(g.d, g.ra, g.rb);
    // Round-off near the containment seam can push the lens a hair past the
    // smaller ball; the exact value never exceeds it.
    return std::min(v, ball_volume(std::min(g.ra, g.rb)));
}

Sphere min_enclosing_sphere(const Sphere& a, const Sphere& b) {
    validate_sphere(a);
    validate_sphere(b);
    PairGeometry g = classify(a, b);
    const double r_small = std::min(g.ra, g.rb);
    const double r_big = std::max(g.ra, g.rb);
    if (g.d + r_small <= r_big) return g.ra >= g.rb ? a : b;
    const double R = (g.d + g.ra + g.rb) / 2.0;
    return {a.center + g.axis * (R - g.ra), R};
}

GiouResult giou(const Sphere& a, const Sphere& b) {
    validate_sphere(a);
    validate_sphere(b);
    PairGeometry g = classify(a, b);
    const double d = g.d, ra = g.ra, rb = g.rb;
    const double va = ball_volume(ra);
    const double vb = ball_volume(rb);

    // Intersection volume and its partials w.r.t. (d, ra, rb).
    double I = 0.0, I_d = 0.0, I_ra = 0.0, I_rb = 0.0;
    switch (g.branch) {
        case Branch::disjoint:
            break;
        case Branch::contained:
            if (ra <= rb) {
                I = va;
                I_ra = 4.0 * M_PI * ra * ra;
            } else {
                I = vb;
                I_rb = 4.0 * M_PI * rb * rb;
            }
            break;
        case Branch::lens: {
            const double s = ra + rb;
            const double m = ra - rb;
            const double A = s - d;
            const double B = d * d + 2.0 * d * s - 3.0 * m * m;
            I = std::min(M_PI * A * A * B / (12.0 * d), std::min(va, vb));
            I_d = M_PI / (12.0 * d * d) *
                  (-2.0 * A * B * d + A * A * (2.0 * d + 2.0 * s) * d - A * A * B);
            I_ra = M_PI / (12.0 * d) * (2.0 * A * B + A * A * (2.0 * d - 6.0 * m));
            I_rb = M_PI / (12.0 * d) * (2.0 * A * B + A * A * (2.0 * d + 6.0 * m));
            break;
        }
    }

    const double U = va + vb - I;
    const double U_d = -I_d;
    const double U_ra = 4.0 * M_PI * ra * ra - I_ra;
    const double U_rb = 4.0 * M_PI * rb * rb - I_rb;

    // Enclosing sphere volume and partials. The containment condition matches
    // the intersection's contained branch exactly.
    double Vc, Vc_d, Vc_ra, Vc_rb;
    if (g.branch == Branch::contained) {
        const double R = std::max(ra, rb);
        Vc = ball_volume(R);
        Vc_d = 0.0;
        Vc_ra = ra >= rb ? 4.0 * M_PI * R * R : 0.0;
        Vc_rb = ra >= rb ? 0.0 : 4.0 * M_PI * R * R;
    } else {
        const double R = (d + ra + rb) / 2.0;
        Vc = ball_volume(R);
        const double dV = 2.0 * M_PI * R * R;  // 4*pi*R^2 * dR/d(.) with dR = 1/2
        Vc_d = dV;
        Vc_ra = dV;
        Vc_rb = dV;
    }

    GiouResult out;
    out.volume_intersection = I;
    out.volume_union = U;
    out.volume_enclosing = Vc;
    out.iou = I / U;
    out.giou = out.iou - (Vc - U) / Vc;
    out.on_branch_boundary = g.boundary;

    // giou = I/U - 1 + U/Vc
    auto partial = [&](double I_t, double U_t, double Vc_t) {
        return (I_t * U - I * U_t) / (U * U) + (U_t * Vc - U * Vc_t) / (Vc * Vc);
    };
    const double g_d = partial(I_d, U_d, Vc_d);
    const double g_ra = partial(I_ra, U_ra, Vc_ra);
    const double g_rb = partial(I_rb, U_rb, Vc_rb);

    // Chain rule into centers; at d ~ 0 the d-dependent terms vanish by symmetry.
    const Vec3 da = -g_d * g.axis;
    const Vec3 db = g_d * g.axis;
    out.gradient = {da.x, da.y, da.z, g_ra, db.x, db.y, db.z, g_rb};
    return out;
}

GiouLoss giou_loss(const Sphere& a, const Sphere& b) {
    GiouResult r = giou(a, b);
    GiouLoss out;
    out.loss = 1.0 - r.giou;
    for (std::size_t i = 0; i < 8; ++i) out.gradient[i] = -r.gradient[i];
    out.on_branch_boundary = r.on_branch_boundary;
    return out;
}

}  // namespace rfrecon
