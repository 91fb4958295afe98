#pragma once
// Set-prediction model: linear channel projection + fixed 2D sinusoidal
// positional encodings + transformer encoder over the antenna grid + decoder
// with learned object queries + sigmoid geometry / softmax class heads.

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "rfrecon/nn.hpp"
#include "rfrecon/set_loss.hpp"

namespace rfrecon {

struct ModelConfig {
    int encoder_layers = 2;
    int decoder_layers = 2;
    int heads = 4;
    int hidden_dim = 32;
    int ff_dim = 128;
    int n_queries = 16;
    int n_classes = 6;  // L + 1 including the no-object class (last slot)
    int grid_x = 8;
    int grid_z = 8;
    int in_channels = 50;  // features per antenna (N_f * C)
    // Learning parameters.
    double learning_rate = 1e-4;
    double weight_decay = 1e-4;
    int batch_size = 64;
    int epochs = 80;
    std::uint64_t seed = 1;

    int tokens() const { return grid_x * grid_z; }
    void validate() const;
};

class DetrModel {
public:
    explicit DetrModel(const ModelConfig& config);
    DetrModel(const DetrModel&) = delete;
    DetrModel& operator=(const DetrModel&) = delete;

    const ModelConfig& config() const { return config_; }

    void init_params(std::uint64_t seed);

    struct Output {
        nn::Mat geometry;  // (batch*n_queries) x 4, sigmoid outputs in (0,1)
        nn::Mat probs;     // (batch*n_queries) x n_classes, rows on the simplex
    };

    // features: (batch*tokens) x in_channels, already standardized.
    Output forward(const nn::Mat& features, int batch);

    // Gradients w.r.t. the sigmoid outputs / softmax probabilities of the last
    // forward call. Accumulates into parameter grads.
    void backward(const nn::Mat& d_geometry, const nn::Mat& d_probs);

    void zero_grad();
    std::vector<nn::Param*>& params() { return params_; }
    const std::vector<nn::Param*>& params() const { return params_; }

private:
    ModelConfig config_;
    nn::Linear in_proj_;
    nn::Mat pos_enc_;  // tokens x hidden
    std::vector<nn::EncoderLayer> encoder_;
    nn::LayerNorm enc_final_ln_;
    nn::Param query_embed_;  // n_queries x hidden
    std::vector<nn::DecoderLayer> decoder_;
    nn::LayerNorm dec_final_ln_;
    nn::Linear head_geom_, head_cls_;
    std::vector<nn::Param*> params_;

    int last_batch_ = 0;
    Output last_out_;
};

// One retained prediction in physical units.
struct Detection {
    std::array<double, 4> geometry{};  // x, y, z (m), r (m)
    int material_class = 0;            // 1..L (material table class index)
    double confidence = 0.0;
    std::vector<double> class_probs;   // full simplex incl. no-object
};

using DetectionSet = std::vector<Detection>;

// Applies label = argmax over material classes (no-object excluded),
// confidence = that maximum, and keeps predictions with confidence >= tau.
DetectionSet predict_and_filter(const DetrModel::Output& out, int batch_index,
                                const ModelConfig& config, const GeometryRanges& ranges,
                                double tau);

// Loss hook for gradient checking: maps outputs to (loss, d_geometry, d_probs).
using LossHook = std::function<double(const DetrModel::Output&, nn::Mat*, nn::Mat*)>;

// Central-difference check of every parameter (h on the parameter), returns the
// worst relative error. Intended for tiny models (hidden_dim <= 16).
double grad_check(DetrModel& model, const nn::Mat& features, int batch, const LossHook& loss,
                  double h = 1e-4);

}  // namespace rfrecon
