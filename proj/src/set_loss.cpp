#include "rfrecon/set_loss.hpp"

#include <cmath>

#include "rfrecon/errors.hpp"

namespace rfrecon {

namespace {

double l1_distance(const std::array<double, 4>& a, const std::array<double, 4>& b) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += std::abs(a[std::size_t(i)] - b[std::size_t(i)]);
    return s;
}

constexpr double kProbFloor = 1e-12;  // keeps NLL finite on collapsed probabilities

}  // namespace

std::vector<double> matching_cost(const std::vector<SetPrediction>& preds,
                                  const std::vector<SetTarget>& targets,
                                  const LossWeights& weights, const GeometryRanges& ranges) {
    std::vector<double> cost(preds.size() * targets.size());
    std::vector<Sphere> target_spheres;
    target_spheres.reserve(targets.size());
    for (const auto& t : targets) target_spheres.push_back(ranges.to_sphere(t.geom_norm));

    for (std::size_t i = 0; i < preds.size(); ++i) {
        Sphere pred_sphere = ranges.to_sphere(preds[i].geom_norm);
        for (std::size_t j = 0; j < targets.size(); ++j) {
            double c = weights.l1 * l1_distance(preds[i].geom_norm, targets[j].geom_norm);
            c += weights.giou * giou_loss(pred_sphere, target_spheres[j]).loss;
            c -= weights.cls * preds[i].class_probs[std::size_t(targets[j].class_slot)];
            cost[i * targets.size() + j] = c;
        }
    }
    return cost;
}

MatchResult match_sets(const std::vector<SetPrediction>& preds,
                       const std::vector<SetTarget>& targets, const LossWeights& weights,
                       const GeometryRanges& ranges) {
    return hungarian(matching_cost(preds, targets, weights, ranges), int(preds.size()),
                     int(targets.size()));
}

LossBreakdown set_loss(const std::vector<SetPrediction>& preds,
                       const std::vector<SetTarget>& targets, const MatchResult& match,
                       const LossWeights& weights, const GeometryRanges& ranges,
                       SetLossGrad* grad) {
    if (match.assignment.size() != preds.size())
        throw invalid_input("match does not cover the prediction set");
    if (targets.empty()) throw invalid_input("set_loss needs at least one target");
    const double inv_s = 1.0 / double(targets.size());

    if (grad) {
        grad->d_geom.assign(preds.size(), {0.0, 0.0, 0.0, 0.0});
        grad->d_probs.assign(preds.size(), {});
        for (std::size_t i = 0; i < preds.size(); ++i)
            grad->d_probs[i].assign(preds[i].class_probs.size(), 0.0);
    }

    LossBreakdown out;
    out.weights = weights;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const SetPrediction& p = preds[i];
        const int j = match.assignment[i];
        const std::size_t no_object = p.class_probs.size() - 1;
        if (j < 0) {
            double prob = std::max(p.class_probs[no_object], kProbFloor);
            out.nll += weights.no_object * -std::log(prob) * inv_s;
            if (grad)
                grad->d_probs[i][no_object] =
                    weights.cls * weights.no_object * inv_s * (-1.0 / prob);
            continue;
        }
        const SetTarget& t = targets[std::size_t(j)];

        out.l1 += l1_distance(p.geom_norm, t.geom_norm) * inv_s;
        GiouLoss gl = giou_loss(ranges.to_sphere(p.geom_norm), ranges.to_sphere(t.geom_norm));
        out.giou += gl.loss * inv_s;
        double prob = std::max(p.class_probs[std::size_t(t.class_slot)], kProbFloor);
        out.nll += -std::log(prob) * inv_s;

        if (grad) {
            for (int k = 0; k < 4; ++k) {
                double diff = p.geom_norm[std::size_t(k)] - t.geom_norm[std::size_t(k)];
                double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
                // giou_loss gradient is in meters; chain through the affine map.
                grad->d_geom[i][std::size_t(k)] =
                    inv_s * (weights.l1 * sign +
                             weights.giou * gl.gradient[std::size_t(k)] * ranges.span(k));
            }
            grad->d_probs[i][std::size_t(t.class_slot)] = weights.cls * inv_s * (-1.0 / prob);
        }
    }
    out.total = weights.l1 * out.l1 + weights.giou * out.giou + weights.cls * out.nll;
    return out;
}

}  // namespace rfrecon
