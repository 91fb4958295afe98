#include <doctest.h>

#include <cmath>

#include "rfrecon/errors.hpp"
#include "rfrecon/oracle.hpp"
#include "rfrecon/rng.hpp"
#include "rfrecon/spheres.hpp"

using namespace rfrecon;

namespace {

Sphere random_sphere(Rng& rng) {
    return {{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)},
            rng.uniform(0.2, 1.5)};
}

// Random pair biased toward overlap, with optional margin from branch seams.
std::pair<Sphere, Sphere> random_pair(Rng& rng, bool smooth_branch_only) {
    while (true) {
        Sphere a = random_sphere(rng);
        double d = rng.uniform(0.0, (a.radius + 1.5) * 1.3);
        Sphere b{a.center + d * rng.unit_sphere(), rng.uniform(0.2, 1.5)};
        if (!smooth_branch_only) return {a, b};
        double sum = a.radius + b.radius;
        double diff = std::abs(a.radius - b.radius);
        double dist = norm(b.center - a.center);
        bool near_seam = std::abs(dist - sum) < 0.05 || std::abs(dist - diff) < 0.05 ||
                         dist < 0.05;
        if (!near_seam) return {a, b};
    }
}

}  // namespace

TEST_CASE("sphere volume") {
    CHECK(sphere_volume({{0, 0, 0}, 1.0}) == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-12));
    // Direct evaluation cross-checked against Monte Carlo box sampling.
    Sphere q{{0.3, -0.2, 0.7}, 0.25};
    double v = sphere_volume(q);
    CHECK(v == doctest::Approx(0.0654498).epsilon(1e-5));
    auto mc = oracle::mc_intersection_volume(q, q, 2000000, 99);
    CHECK(std::abs(v - mc.volume) <= 3.0 * mc.sigma);
    // Cubic scaling.
    CHECK(sphere_volume({{0, 0, 0}, 0.5}) == doctest::Approx(8.0 * v).epsilon(1e-12));
    CHECK_THROWS_AS(sphere_volume({{0, 0, 0}, -1.0}), Error);
    CHECK_THROWS_AS(sphere_volume({{0, 0, 0}, std::nan("")}), Error);
}

TEST_CASE("intersection volume closed forms") {
    Sphere a{{0, 0, 0}, 1.0};
    CHECK(intersection_volume(a, a) == doctest::Approx(sphere_volume(a)).epsilon(1e-12));

    // r_a = r_b = 1, d = 1: 5 pi / 12, checked against the Monte Carlo oracle.
    Sphere b{{1, 0, 0}, 1.0};
    double lens = intersection_volume(a, b);
    CHECK(lens == doctest::Approx(5.0 * M_PI / 12.0).epsilon(1e-12));
    auto mc = oracle::mc_intersection_volume(a, b, 2000000, 7);
    CHECK(std::abs(lens - mc.volume) <= 3.0 * mc.sigma);

    CHECK(intersection_volume(a, {{2, 0, 0}, 1.0}) == doctest::Approx(0.0));
    CHECK(intersection_volume(a, {{5, 0, 0}, 1.0}) == doctest::Approx(0.0));
    // Containment: the small sphere's volume.
    CHECK(intersection_volume({{0, 0, 0}, 3.0}, {{1, 0, 0}, 1.0}) ==
          doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-12));
}

TEST_CASE("intersection volume vs Monte Carlo oracle on random pairs") {
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        auto [a, b] = random_pair(rng, false);
        double closed = intersection_volume(a, b);
        auto mc = oracle::mc_intersection_volume(a, b, 400000,
                                                 derive_seed(11, {std::uint64_t(trial)}));
        CHECK(std::abs(closed - mc.volume) <= 3.0 * mc.sigma + 1e-12);
    }
}

TEST_CASE("min enclosing sphere") {
    Sphere big{{0, 0, 0}, 3.0}, small{{1, 0, 0}, 1.0};
    Sphere enc = min_enclosing_sphere(big, small);
    CHECK(enc.radius == doctest::Approx(3.0));
    CHECK(norm(enc.center - big.center) == doctest::Approx(0.0));

    Sphere a{{0, 0, 0}, 1.0}, b{{3, 0, 0}, 1.0};
    enc = min_enclosing_sphere(a, b);
    CHECK(enc.radius == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(enc.center.x == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(enc.center.y == doctest::Approx(0.0));
    // The extreme surface points lie exactly on the enclosing sphere.
    CHECK(norm(Vec3{-1, 0, 0} - enc.center) == doctest::Approx(enc.radius).epsilon(1e-12));
    CHECK(norm(Vec3{4, 0, 0} - enc.center) == doctest::Approx(enc.radius).epsilon(1e-12));
    // Monte Carlo points of both spheres stay inside.
    Rng rng(5);
    for (int i = 0; i < 20000; ++i) {
        const Sphere& s = (i % 2 == 0) ? a : b;
        Vec3 p = s.center + std::cbrt(rng.uniform()) * s.radius * rng.unit_sphere();
        CHECK(norm(p - enc.center) <= enc.radius * (1.0 + 1e-12));
    }

    enc = min_enclosing_sphere(a, a);
    CHECK(enc.radius == doctest::Approx(a.radius));
    CHECK(norm(enc.center - a.center) == doctest::Approx(0.0));
}

TEST_CASE("giou reference values") {
    Sphere a{{0, 0, 0}, 1.0};
    GiouResult same = giou(a, a);
    CHECK(same.iou == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(same.giou == doctest::Approx(1.0).epsilon(1e-12));

    // d = 1: iou = 5/27, giou = 5/27 - 1/2 (enclosing R = 1.5, union = 9 pi / 4).
    GiouResult r = giou(a, {{1, 0, 0}, 1.0});
    CHECK(r.iou == doctest::Approx(5.0 / 27.0).epsilon(1e-12));
    CHECK(r.giou == doctest::Approx(5.0 / 27.0 - 0.5).epsilon(1e-12));
    CHECK(r.volume_union == doctest::Approx(9.0 * M_PI / 4.0).epsilon(1e-12));
    CHECK(r.volume_enclosing == doctest::Approx(4.5 * M_PI).epsilon(1e-12));

    // d = 4 disjoint: giou = -25/27 with enclosing R = 3.
    r = giou(a, {{4, 0, 0}, 1.0});
    CHECK(r.iou == doctest::Approx(0.0));
    CHECK(r.giou == doctest::Approx(-25.0 / 27.0).epsilon(1e-12));

    GiouLoss loss = giou_loss(a, {{1, 0, 0}, 1.0});
    CHECK(loss.loss == doctest::Approx(1.0 - (5.0 / 27.0 - 0.5)).epsilon(1e-12));
    CHECK(giou_loss(a, a).loss == doctest::Approx(0.0));
}

TEST_CASE("giou loss approaches 2 monotonically for receding spheres") {
    Sphere a{{0, 0, 0}, 1.0};
    double prev = 0.0;
    for (double d = 2.5; d < 60.0; d *= 1.5) {
        double l = giou_loss(a, {{d, 0, 0}, 1.0}).loss;
        CHECK(l > prev);
        CHECK(l < 2.0);
        prev = l;
    }
    CHECK(prev > 1.95);
}

TEST_CASE("giou structural invariants on random pairs") {
    Rng rng(31337);
    for (int trial = 0; trial < 10000; ++trial) {
        auto [a, b] = random_pair(rng, false);
        GiouResult r = giou(a, b);
        double va = sphere_volume(a), vb = sphere_volume(b);
        CHECK(r.volume_intersection >= 0.0);
        CHECK(r.volume_intersection <= std::min(va, vb) * (1.0 + 1e-12));
        CHECK(r.volume_union ==
              doctest::Approx(va + vb - r.volume_intersection).epsilon(1e-12));
        CHECK(r.volume_union >= std::max(va, vb) * (1.0 - 1e-12));
        CHECK(r.volume_enclosing >= r.volume_union * (1.0 - 1e-12));
        CHECK(r.giou <= r.iou + 1e-15);
        CHECK(r.giou > -1.0);
        CHECK(r.giou <= 1.0 + 1e-15);
        CHECK(r.iou >= 0.0);
        CHECK(r.iou <= 1.0 + 1e-15);
    }
}

TEST_CASE("giou equals iou under containment") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        Sphere big{{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)},
                   rng.uniform(1.0, 2.0)};
        double margin = rng.uniform(0.05, 0.4);
        double r_small = rng.uniform(0.1, big.radius - margin);
        double d = rng.uniform(0.0, big.radius - r_small - margin);
        Sphere small{big.center + d * rng.unit_sphere(), r_small};
        GiouResult r = giou(big, small);
        CHECK(r.giou == doctest::Approx(r.iou).epsilon(1e-12));
    }
}

TEST_CASE("giou rigid-motion and scaling invariance") {
    Rng rng(555);
    for (int trial = 0; trial < 300; ++trial) {
        auto [a, b] = random_pair(rng, false);
        GiouResult base = giou(a, b);

        // Random rotation (Rodrigues) + translation applied to both spheres.
        Vec3 axis = rng.unit_sphere();
        double ang = rng.uniform(0, 2 * M_PI);
        Vec3 t{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        auto rot = [&](const Vec3& v) {
            double c = std::cos(ang), s = std::sin(ang);
            return v * c + cross(axis, v) * s + axis * dot(axis, v) * (1.0 - c);
        };
        Sphere a2{rot(a.center) + t, a.radius};
        Sphere b2{rot(b.center) + t, b.radius};
        GiouResult moved = giou(a2, b2);
        CHECK(moved.iou == doctest::Approx(base.iou).epsilon(1e-12));
        CHECK(moved.giou == doctest::Approx(base.giou).epsilon(1e-12));

        double k = rng.uniform(0.1, 10.0);
        Sphere a3{a.center * k, a.radius * k};
        Sphere b3{b.center * k, b.radius * k};
        GiouResult scaled = giou(a3, b3);
        CHECK(scaled.iou == doctest::Approx(base.iou).epsilon(1e-10));
        CHECK(scaled.giou == doctest::Approx(base.giou).epsilon(1e-10));
    }
}

TEST_CASE("giou analytic gradient matches central differences") {
    Rng rng(4242);
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        auto [a, b] = random_pair(rng, true);
        GiouResult r = giou(a, b);
        REQUIRE(!r.on_branch_boundary);
        auto value_at = [&](int k, double delta) {
            Sphere aa = a, bb = b;
            double* fields[8] = {&aa.center.x, &aa.center.y, &aa.center.z, &aa.radius,
                                 &bb.center.x, &bb.center.y, &bb.center.z, &bb.radius};
            *fields[k] += delta;
            return giou(aa, bb).giou;
        };
        for (int k = 0; k < 8; ++k) {
            double fd = (value_at(k, h) - value_at(k, -h)) / (2.0 * h);
            double an = r.gradient[std::size_t(k)];
            double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
            CHECK(std::abs(fd - an) / denom < 1e-4);
        }
    }
}

TEST_CASE("giou degenerate branches") {
    // Coincident centers, equal radii: boundary, giou = 1, zero gradient.
    Sphere a{{1, 2, 3}, 0.8};
    GiouResult r = giou(a, a);
    CHECK(r.on_branch_boundary);
    for (double g : r.gradient) CHECK(g == doctest::Approx(0.0).epsilon(1e-12));

    // Tangent spheres: flagged, value continuous (zero intersection).
    r = giou({{0, 0, 0}, 1.0}, {{2, 0, 0}, 1.0});
    CHECK(r.on_branch_boundary);
    CHECK(r.volume_intersection == doctest::Approx(0.0));
}
