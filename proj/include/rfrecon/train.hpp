#pragma once
// Mini-batch training of the set-prediction model with AdamW (decoupled weight
// decay). Deterministic given the seed: fixed shuffle stream, fixed sample
// order inside batches, single-threaded reductions.

#include <cstdint>
#include <vector>

#include "rfrecon/features.hpp"
#include "rfrecon/model.hpp"
#include "rfrecon/scene.hpp"

namespace rfrecon {

struct LabeledSample {
    nn::Mat features;  // tokens x channels, raw (unstandardized)
    std::vector<SetTarget> targets;
};

LabeledSample make_labeled_sample(const FeatureMap& map, const SceneRecord& scene,
                                  const GeometryRanges& ranges);

struct FeatureStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd std_dev;  // zero-variance channels get 1
};

FeatureStats compute_feature_stats(const std::vector<LabeledSample>& data,
                                   const std::vector<int>& indices);

nn::Mat standardize(const nn::Mat& features, const FeatureStats& stats);

struct AdamW {
    explicit AdamW(std::vector<nn::Param*>& params);
    void step(double lr, double weight_decay);

    std::vector<nn::Param*>* params_;
    std::vector<nn::Mat> m_, v_;
    long t_ = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

struct TrainHistory {
    std::vector<double> train_loss;  // per epoch, mean total over train batches
    std::vector<double> val_loss;    // per epoch
};

// Mean set-match loss over the given samples (forward only).
double mean_loss(DetrModel& model, const std::vector<LabeledSample>& data,
                 const std::vector<int>& indices, const FeatureStats& stats,
                 const LossWeights& weights, const GeometryRanges& ranges);

// Optimizes model in place; lr/batch/epochs come from model.config().
// Throws Error(divergence) with diagnostics when the loss goes non-finite.
TrainHistory train_model(DetrModel& model, const std::vector<LabeledSample>& data,
                         const std::vector<int>& train_idx, const std::vector<int>& val_idx,
                         const FeatureStats& stats, const LossWeights& weights,
                         const GeometryRanges& ranges, std::uint64_t shuffle_seed);

}  // namespace rfrecon
