#include "rfrecon/model.hpp"

#include <cmath>

#include "rfrecon/errors.hpp"
#include "rfrecon/rng.hpp"

namespace rfrecon {

void ModelConfig::validate() const {
    if (hidden_dim < 1 || hidden_dim % heads != 0)
        throw config_error("hidden_dim must be a positive multiple of heads");
    if (encoder_layers < 1 || decoder_layers < 1) throw config_error("need >= 1 layer each");
    if (n_queries < 1) throw config_error("n_queries must be >= 1");
    if (n_classes < 2) throw config_error("need at least one material class plus no-object");
    if (grid_x < 1 || grid_z < 1 || in_channels < 1) throw config_error("bad input shape");
    if (batch_size < 1 || epochs < 1) throw config_error("bad learning parameters");
    if (!(learning_rate > 0.0)) throw config_error("learning_rate must be positive");
}

DetrModel::DetrModel(const ModelConfig& config) : config_(config) {
    config_.validate();
    const int d = config_.hidden_dim;

    in_proj_.init("in_proj", config_.in_channels, d);
    pos_enc_ = nn::positional_encoding_2d(config_.grid_x, config_.grid_z, d);

    encoder_.resize(std::size_t(config_.encoder_layers));
    for (int i = 0; i < config_.encoder_layers; ++i)
        encoder_[std::size_t(i)].init("enc" + std::to_string(i), d, config_.heads, config_.ff_dim);
    enc_final_ln_.init("enc_final_ln", d);

    query_embed_.init_shape("query_embed", config_.n_queries, d);
    decoder_.resize(std::size_t(config_.decoder_layers));
    for (int i = 0; i < config_.decoder_layers; ++i)
        decoder_[std::size_t(i)].init("dec" + std::to_string(i), d, config_.heads, config_.ff_dim);
    dec_final_ln_.init("dec_final_ln", d);

    head_geom_.init("head_geom", d, 4);
    head_cls_.init("head_cls", d, config_.n_classes);

    auto add_linear = [&](nn::Linear& l) {
        params_.push_back(&l.weight);
        params_.push_back(&l.bias);
    };
    auto add_ln = [&](nn::LayerNorm& l) {
        params_.push_back(&l.gamma);
        params_.push_back(&l.beta);
    };
    auto add_mha = [&](nn::MultiHeadAttention& m) {
        add_linear(m.q);
        add_linear(m.k);
        add_linear(m.v);
        add_linear(m.o);
    };
    add_linear(in_proj_);
    for (auto& e : encoder_) {
        add_ln(e.ln1);
        add_mha(e.attn);
        add_ln(e.ln2);
        add_linear(e.ff.expand);
        add_linear(e.ff.contract);
    }
    add_ln(enc_final_ln_);
    params_.push_back(&query_embed_);
    for (auto& dlayer : decoder_) {
        add_ln(dlayer.ln1);
        add_mha(dlayer.self_attn);
        add_ln(dlayer.ln2);
        add_mha(dlayer.cross_attn);
        add_ln(dlayer.ln3);
        add_linear(dlayer.ff.expand);
        add_linear(dlayer.ff.contract);
    }
    add_ln(dec_final_ln_);
    add_linear(head_geom_);
    add_linear(head_cls_);

    init_params(config_.seed);
}

void DetrModel::init_params(std::uint64_t seed) {
    Rng rng(derive_seed(seed, {0x696e6974ULL}));
    for (nn::Param* p : params_) {
        p->grad.setZero();
        bool is_weight = p->name.size() > 7 &&
                         p->name.compare(p->name.size() - 7, 7, ".weight") == 0;
        if (is_weight) {
            double lim = std::sqrt(6.0 / double(p->value.rows() + p->value.cols()));
            for (Eigen::Index i = 0; i < p->value.rows(); ++i)
                for (Eigen::Index j = 0; j < p->value.cols(); ++j)
                    p->value(i, j) = rng.uniform(-lim, lim);
        } else if (p->name == "query_embed") {
            for (Eigen::Index i = 0; i < p->value.rows(); ++i)
                for (Eigen::Index j = 0; j < p->value.cols(); ++j)
                    p->value(i, j) = 0.02 * rng.gaussian();
        } else if (p->name.size() > 6 &&
                   p->name.compare(p->name.size() - 6, 6, ".gamma") == 0) {
            p->value.setOnes();
        } else {
            p->value.setZero();  // biases, betas
        }
    }
}

DetrModel::Output DetrModel::forward(const nn::Mat& features, int batch) {
    const int t = config_.tokens();
    if (features.cols() != config_.in_channels ||
        features.rows() != Eigen::Index(batch) * t)
        throw invalid_input("feature matrix shape does not match the model input spec");
    last_batch_ = batch;

    nn::Mat x = in_proj_.forward(features);
    for (int s = 0; s < batch; ++s) x.middleRows(Eigen::Index(s) * t, t) += pos_enc_;
    for (auto& e : encoder_) x = e.forward(x, batch, t);
    nn::Mat memory = enc_final_ln_.forward(x);

    nn::Mat q(Eigen::Index(batch) * config_.n_queries, config_.hidden_dim);
    for (int s = 0; s < batch; ++s)
        q.middleRows(Eigen::Index(s) * config_.n_queries, config_.n_queries) =
            query_embed_.value;
    for (auto& dlayer : decoder_)
        q = dlayer.forward(q, memory, batch, config_.n_queries, t);
    nn::Mat h = dec_final_ln_.forward(q);

    Output out;
    nn::Mat zg = head_geom_.forward(h);
    out.geometry = (1.0 / (1.0 + (-zg.array()).exp())).matrix();
    out.probs = nn::softmax_rows(head_cls_.forward(h));
    last_out_ = out;
    return out;
}

void DetrModel::backward(const nn::Mat& d_geometry, const nn::Mat& d_probs) {
    const int t = config_.tokens();
    const int batch = last_batch_;

    nn::Mat dzg =
        (d_geometry.array() * last_out_.geometry.array() * (1.0 - last_out_.geometry.array()))
            .matrix();
    nn::Mat dzc = nn::softmax_backward(last_out_.probs, d_probs);

    nn::Mat dh = head_geom_.backward(dzg);
    dh += head_cls_.backward(dzc);
    nn::Mat dq = dec_final_ln_.backward(dh);

    nn::Mat dmem = nn::Mat::Zero(Eigen::Index(batch) * t, config_.hidden_dim);
    for (std::size_t i = decoder_.size(); i-- > 0;) dq = decoder_[i].backward(dq, &dmem);

    for (int s = 0; s < batch; ++s)
        query_embed_.grad +=
            dq.middleRows(Eigen::Index(s) * config_.n_queries, config_.n_queries);

    nn::Mat dx = enc_final_ln_.backward(dmem);
    for (std::size_t i = encoder_.size(); i-- > 0;) dx = encoder_[i].backward(dx);
    in_proj_.backward(dx);  // input gradient discarded; features are not trained
}

void DetrModel::zero_grad() {
    for (nn::Param* p : params_) p->grad.setZero();
}

DetectionSet predict_and_filter(const DetrModel::Output& out, int batch_index,
                                const ModelConfig& config, const GeometryRanges& ranges,
                                double tau) {
    DetectionSet set;
    const int n = config.n_queries;
    const int n_materials = config.n_classes - 1;
    for (int i = 0; i < n; ++i) {
        Eigen::Index row = Eigen::Index(batch_index) * n + i;
        int best = 0;
        double best_p = out.probs(row, 0);
        for (int l = 1; l < n_materials; ++l) {
            if (out.probs(row, l) > best_p) {
                best_p = out.probs(row, l);
                best = l;
            }
        }
        if (best_p < tau) continue;
        Detection det;
        det.material_class = best + 1;  // material slots are 0-based, classes 1-based
        det.confidence = best_p;
        std::array<double, 4> gnorm{out.geometry(row, 0), out.geometry(row, 1),
                                    out.geometry(row, 2), out.geometry(row, 3)};
        det.geometry = ranges.to_meters(gnorm);
        det.class_probs.resize(std::size_t(config.n_classes));
        for (int l = 0; l < config.n_classes; ++l)
            det.class_probs[std::size_t(l)] = out.probs(row, l);
        set.push_back(std::move(det));
    }
    return set;
}

double grad_check(DetrModel& model, const nn::Mat& features, int batch, const LossHook& loss,
                  double h) {
    model.zero_grad();
    DetrModel::Output out = model.forward(features, batch);
    nn::Mat d_geom, d_probs;
    loss(out, &d_geom, &d_probs);
    model.backward(d_geom, d_probs);

    double worst = 0.0;
    for (nn::Param* p : model.params()) {
        for (Eigen::Index i = 0; i < p->value.rows(); ++i) {
            for (Eigen::Index j = 0; j < p->value.cols(); ++j) {
                const double orig = p->value(i, j);
                nn::Mat dg, dp;
                p->value(i, j) = orig + h;
                double lp = loss(model.forward(features, batch), &dg, &dp);
                p->value(i, j) = orig - h;
                double lm = loss(model.forward(features, batch), &dg, &dp);
                p->value(i, j) = orig;
                double fd = (lp - lm) / (2.0 * h);
                double an = p->grad(i, j);
                double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
                worst = std::max(worst, std::abs(fd - an) / denom);
            }
        }
    }
    return worst;
}

}  // namespace rfrecon
