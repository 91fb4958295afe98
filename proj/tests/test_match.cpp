#include <doctest.h>

#include <cmath>

#include "rfrecon/errors.hpp"
#include "rfrecon/oracle.hpp"
#include "rfrecon/rng.hpp"
#include "rfrecon/set_loss.hpp"

using namespace rfrecon;

namespace {

SetPrediction make_pred(std::array<double, 4> g, std::vector<double> probs) {
    SetPrediction p;
    p.geom_norm = g;
    p.class_probs = std::move(probs);
    return p;
}

std::vector<SetPrediction> random_preds(Rng& rng, int n, int n_classes) {
    std::vector<SetPrediction> preds;
    for (int i = 0; i < n; ++i) {
        SetPrediction p;
        for (int g = 0; g < 4; ++g) p.geom_norm[std::size_t(g)] = rng.uniform(0.05, 0.95);
        double sum = 0.0;
        p.class_probs.resize(std::size_t(n_classes));
        for (double& v : p.class_probs) {
            v = rng.uniform(0.05, 1.0);
            sum += v;
        }
        for (double& v : p.class_probs) v /= sum;
        preds.push_back(p);
    }
    return preds;
}

std::vector<SetTarget> random_targets(Rng& rng, int n, int n_materials) {
    std::vector<SetTarget> ts;
    for (int i = 0; i < n; ++i) {
        SetTarget t;
        for (int g = 0; g < 4; ++g) t.geom_norm[std::size_t(g)] = rng.uniform(0.05, 0.95);
        t.class_slot = int(rng.uniform_index(std::uint64_t(n_materials)));
        ts.push_back(t);
    }
    return ts;
}

}  // namespace

TEST_CASE("hungarian reference cases") {
    MatchResult r = hungarian({{1, 2}, {2, 1}});
    CHECK(r.assignment[0] == 0);
    CHECK(r.assignment[1] == 1);
    CHECK(r.total_cost == doctest::Approx(2.0));

    r = hungarian({{4, 1, 3}, {2, 0, 5}, {3, 2, 2}});
    CHECK(r.total_cost == doctest::Approx(5.0));
    CHECK(r.assignment[0] == 1);
    CHECK(r.assignment[1] == 0);
    CHECK(r.assignment[2] == 2);

    r = hungarian({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
    CHECK(r.total_cost == doctest::Approx(0.0));
    CHECK(r.assignment[0] == 0);
    CHECK(r.assignment[1] == 1);
    CHECK(r.assignment[2] == 2);

    CHECK_THROWS_AS(hungarian({{1.0, std::nan("")}, {0.0, 1.0}}), Error);
}

TEST_CASE("hungarian equals brute force on random matrices") {
    Rng rng(808);
    for (int trial = 0; trial < 1000; ++trial) {
        int n = 1 + int(rng.uniform_index(7));
        int m = 1 + int(rng.uniform_index(7));
        std::vector<double> cost(std::size_t(n) * std::size_t(m));
        // Integer-valued costs keep the comparison exact in doubles.
        for (double& c : cost) c = double(rng.uniform_index(201)) - 100.0;
        MatchResult r = hungarian(cost, n, m);
        double brute = oracle::brute_force_assignment_cost(cost, n, m);
        CHECK(r.total_cost == brute);
        CHECK(r.matched_count() == std::min(n, m));
        // Assignment is injective.
        std::vector<char> seen(std::size_t(m), 0);
        for (int a : r.assignment) {
            if (a < 0) continue;
            CHECK(!seen[std::size_t(a)]);
            seen[std::size_t(a)] = 1;
        }
    }
}

TEST_CASE("hungarian rectangular with more predictions than targets") {
    // 4 rows, 2 cols: exactly 2 rows matched, optimum over injections.
    std::vector<double> cost = {5, 5, 1, 9, 9, 1, 5, 5};
    MatchResult r = hungarian(cost, 4, 2);
    CHECK(r.matched_count() == 2);
    CHECK(r.total_cost == doctest::Approx(2.0));
    CHECK(r.assignment[1] == 0);
    CHECK(r.assignment[2] == 1);
}

TEST_CASE("matching cost conventions") {
    GeometryRanges ranges;
    LossWeights w;
    std::vector<SetTarget> targets(1);
    targets[0].geom_norm = {0.5, 0.5, 0.5, 0.5};
    targets[0].class_slot = 2;

    // Perfect geometry, probability 1 on the true class: cost = -cls weight.
    auto pred = make_pred({0.5, 0.5, 0.5, 0.5}, {0, 0, 1, 0, 0, 0});
    auto cost = matching_cost({pred}, targets, w, ranges);
    CHECK(cost[0] == doctest::Approx(-w.cls).epsilon(1e-12));

    // Identical geometry, uniform probabilities over 6 classes: -cls/6.
    pred = make_pred({0.5, 0.5, 0.5, 0.5},
                     {1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6});
    cost = matching_cost({pred}, targets, w, ranges);
    CHECK(cost[0] == doctest::Approx(-w.cls / 6.0).epsilon(1e-12));

    // Disjoint far spheres: the GIoU term contributes giou_w * (1 + 25/27).
    // Geometry chosen as the d=4, r=1 case in meters via custom ranges.
    GeometryRanges wide;
    wide.lo = {-10, -10, -10, 0.5};
    wide.hi = {10, 10, 10, 1.5};
    SetTarget far_t;
    far_t.geom_norm = {0.5, 0.5, 0.5, 0.5};  // center origin, r = 1
    far_t.class_slot = 0;
    auto far_p = make_pred({0.7, 0.5, 0.5, 0.5}, {1, 0});  // center (4,0,0), r = 1
    LossWeights only_giou;
    only_giou.l1 = 0.0;
    only_giou.cls = 0.0;
    cost = matching_cost({far_p}, {far_t}, only_giou, wide);
    CHECK(cost[0] == doctest::Approx(only_giou.giou * (1.0 + 25.0 / 27.0)).epsilon(1e-12));
}

TEST_CASE("set loss reference values") {
    GeometryRanges ranges;
    LossWeights w;

    std::vector<SetTarget> targets(1);
    targets[0].geom_norm = {0.4, 0.6, 0.5, 0.5};
    targets[0].class_slot = 1;

    // Perfect prediction, probability 1: zero loss.
    std::vector<SetPrediction> preds = {make_pred(targets[0].geom_norm, {0, 1, 0, 0})};
    MatchResult match = match_sets(preds, targets, w, ranges);
    LossBreakdown lb = set_loss(preds, targets, match, w, ranges);
    CHECK(lb.total == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(lb.l1 == doctest::Approx(0.0));
    CHECK(lb.giou == doctest::Approx(0.0));
    CHECK(lb.nll == doctest::Approx(0.0));

    // p(true) = 0.5: nll component = ln 2 on top of zero geometry terms.
    preds = {make_pred(targets[0].geom_norm, {0.25, 0.5, 0.125, 0.125})};
    match = match_sets(preds, targets, w, ranges);
    lb = set_loss(preds, targets, match, w, ranges);
    CHECK(lb.nll == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(lb.total == doctest::Approx(w.cls * std::log(2.0)).epsilon(1e-12));
    CHECK(lb.total ==
          doctest::Approx(w.l1 * lb.l1 + w.giou * lb.giou + w.cls * lb.nll).epsilon(1e-12));
}

TEST_CASE("set loss is bit-identical under ground-truth permutation") {
    Rng rng(2718);
    GeometryRanges ranges;
    LossWeights w;
    for (int trial = 0; trial < 50; ++trial) {
        auto preds = random_preds(rng, 6, 4);
        auto targets = random_targets(rng, 4, 3);

        MatchResult m1 = match_sets(preds, targets, w, ranges);
        SetLossGrad g1;
        LossBreakdown l1 = set_loss(preds, targets, m1, w, ranges, &g1);

        // Deterministic rotation + swap permutation of the targets.
        std::vector<SetTarget> permuted = {targets[2], targets[0], targets[3], targets[1]};
        MatchResult m2 = match_sets(preds, permuted, w, ranges);
        SetLossGrad g2;
        LossBreakdown l2 = set_loss(preds, permuted, m2, w, ranges, &g2);

        CHECK(l1.total == l2.total);  // bit-exact
        CHECK(l1.l1 == l2.l1);
        CHECK(l1.giou == l2.giou);
        CHECK(l1.nll == l2.nll);
        for (std::size_t i = 0; i < preds.size(); ++i) {
            for (int k = 0; k < 4; ++k)
                CHECK(g1.d_geom[i][std::size_t(k)] == g2.d_geom[i][std::size_t(k)]);
            for (std::size_t c = 0; c < g1.d_probs[i].size(); ++c)
                CHECK(g1.d_probs[i][c] == g2.d_probs[i][c]);
        }
    }
}

TEST_CASE("set loss lower bound and unmatched handling") {
    Rng rng(11);
    GeometryRanges ranges;
    LossWeights w;
    for (int trial = 0; trial < 200; ++trial) {
        auto preds = random_preds(rng, 5, 4);
        auto targets = random_targets(rng, 3, 3);
        MatchResult m = match_sets(preds, targets, w, ranges);
        LossBreakdown lb = set_loss(preds, targets, m, w, ranges);
        CHECK(lb.total >= 0.0);
        CHECK(lb.l1 >= 0.0);
        CHECK(lb.giou >= 0.0);
        CHECK(lb.nll >= 0.0);
    }
}

TEST_CASE("set loss gradient matches central differences") {
    Rng rng(314159);
    GeometryRanges ranges;
    LossWeights w;
    const double h = 1e-6;
    for (int trial = 0; trial < 25; ++trial) {
        auto preds = random_preds(rng, 4, 4);
        auto targets = random_targets(rng, 3, 3);
        MatchResult match = match_sets(preds, targets, w, ranges);
        SetLossGrad grad;
        set_loss(preds, targets, match, w, ranges, &grad);

        for (std::size_t i = 0; i < preds.size(); ++i) {
            for (int k = 0; k < 4; ++k) {
                auto perturbed = preds;
                perturbed[i].geom_norm[std::size_t(k)] += h;
                double lp = set_loss(perturbed, targets, match, w, ranges).total;
                perturbed[i].geom_norm[std::size_t(k)] -= 2 * h;
                double lm = set_loss(perturbed, targets, match, w, ranges).total;
                double fd = (lp - lm) / (2 * h);
                double an = grad.d_geom[i][std::size_t(k)];
                double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
                CHECK(std::abs(fd - an) / denom < 1e-4);
            }
            for (std::size_t c = 0; c < preds[i].class_probs.size(); ++c) {
                auto perturbed = preds;
                perturbed[i].class_probs[c] += h;
                double lp = set_loss(perturbed, targets, match, w, ranges).total;
                perturbed[i].class_probs[c] -= 2 * h;
                double lm = set_loss(perturbed, targets, match, w, ranges).total;
                double fd = (lp - lm) / (2 * h);
                double an = grad.d_probs[i][c];
                double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
                CHECK(std::abs(fd - an) / denom < 1e-4);
            }
        }
    }
}

TEST_CASE("doubling the l1 weight doubles the l1 gradient component") {
    Rng rng(86);
    GeometryRanges ranges;
    auto preds = random_preds(rng, 3, 3);
    auto targets = random_targets(rng, 2, 2);

    LossWeights geometry_only;
    geometry_only.giou = 0.0;
    geometry_only.cls = 0.0;
    geometry_only.no_object = 0.0;
    MatchResult match = match_sets(preds, targets, geometry_only, ranges);

    SetLossGrad g1, g2;
    set_loss(preds, targets, match, geometry_only, ranges, &g1);
    LossWeights doubled = geometry_only;
    doubled.l1 *= 2.0;
    set_loss(preds, targets, match, doubled, ranges, &g2);
    for (std::size_t i = 0; i < preds.size(); ++i)
        for (int k = 0; k < 4; ++k)
            CHECK(g2.d_geom[i][std::size_t(k)] ==
                  doctest::Approx(2.0 * g1.d_geom[i][std::size_t(k)]).epsilon(1e-12));
}
