#pragma once
// Set-prediction loss machinery: Hungarian matching cost between predictions
// and ground truth, and the composite matched loss (l1 in normalized
// coordinates + sphere GIoU + classification NLL) with analytic gradients.
//
// The matcher scores the class term with the probability itself; the trained
// loss uses the negative log-likelihood. The no-object class lives at slot L
// (the last probability entry).

#include <array>
#include <vector>

#include "rfrecon/hungarian.hpp"
#include "rfrecon/spheres.hpp"

namespace rfrecon {

// Maps [0,1]-normalized (x, y, z, r) to meters and back.
struct GeometryRanges {
    std::array<double, 4> lo{-1.5, -3.5, 1.75, 0.25};
    std::array<double, 4> hi{1.5, 3.5, 2.25, 0.5};

    double span(int i) const { return hi[std::size_t(i)] - lo[std::size_t(i)]; }
    std::array<double, 4> to_meters(const std::array<double, 4>& n) const {
        std::array<double, 4> out;
        for (int i = 0; i < 4; ++i)
            out[std::size_t(i)] = lo[std::size_t(i)] + n[std::size_t(i)] * span(i);
        return out;
    }
    std::array<double, 4> to_normalized(const std::array<double, 4>& m) const {
        std::array<double, 4> out;
        for (int i = 0; i < 4; ++i)
            out[std::size_t(i)] = (m[std::size_t(i)] - lo[std::size_t(i)]) / span(i);
        return out;
    }
    Sphere to_sphere(const std::array<double, 4>& n) const {
        auto m = to_meters(n);
        return {{m[0], m[1], m[2]}, m[3]};
    }
};

struct LossWeights {
    double l1 = 5.0;
    double giou = 2.0;
    double cls = 1.0;
    double no_object = 0.1;  // down-weight on unmatched predictions' NLL
};

struct SetPrediction {
    std::array<double, 4> geom_norm{};   // (x, y, z, r) in [0,1]
    std::vector<double> class_probs;     // simplex over L+1, no-object last
};

struct SetTarget {
    std::array<double, 4> geom_norm{};
    int class_slot = 0;  // 0..L-1
};

// cost(i,j) = l1 * |g_i - t_j|_1 + giou_w * (1 - giou) - cls * p_i(l_j)
std::vector<double> matching_cost(const std::vector<SetPrediction>& preds,
                                  const std::vector<SetTarget>& targets,
                                  const LossWeights& weights, const GeometryRanges& ranges);

// Convenience: cost + Hungarian. assignment[pred] = target index or -1.
MatchResult match_sets(const std::vector<SetPrediction>& preds,
                       const std::vector<SetTarget>& targets, const LossWeights& weights,
                       const GeometryRanges& ranges);

struct LossBreakdown {
    double l1 = 0.0;    // unweighted component averages (over target count)
    double giou = 0.0;  // mean (1 - giou) over matched pairs
    double nll = 0.0;
    double total = 0.0;
    LossWeights weights;
};

struct SetLossGrad {
    // Per prediction: d(total)/d(geom_norm) and d(total)/d(class_probs).
    std::vector<std::array<double, 4>> d_geom;
    std::vector<std::vector<double>> d_probs;
};

// Matched pairs contribute l1 + (1-GIoU) + NLL(true class); unmatched
// predictions contribute down-weighted NLL(no-object). Components are averaged
// over the target count, summed in ascending prediction index (canonical, so
// ground-truth permutations cannot change the result bits).
LossBreakdown set_loss(const std::vector<SetPrediction>& preds,
                       const std::vector<SetTarget>& targets, const MatchResult& match,
                       const LossWeights& weights, const GeometryRanges& ranges,
                       SetLossGrad* grad = nullptr);

}  // namespace rfrecon
