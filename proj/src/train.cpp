#include "rfrecon/train.hpp"

#include <cmath>
#include <string>

#include "rfrecon/errors.hpp"
#include "rfrecon/rng.hpp"

namespace rfrecon {

LabeledSample make_labeled_sample(const FeatureMap& map, const SceneRecord& scene,
                                  const GeometryRanges& ranges) {
    LabeledSample s;
    s.features.resize(map.n_antennas, map.channels());
    for (int a = 0; a < map.n_antennas; ++a)
        for (int c = 0; c < map.channels(); ++c) s.features(a, c) = map.at(a, c);
    for (const SpherePrimitive& sp : scene.spheres) {
        SetTarget t;
        t.geom_norm = ranges.to_normalized(
            {sp.sphere.center.x, sp.sphere.center.y, sp.sphere.center.z, sp.sphere.radius});
        t.class_slot = sp.material_class - 1;
        s.targets.push_back(t);
    }
    return s;
}

FeatureStats compute_feature_stats(const std::vector<LabeledSample>& data,
                                   const std::vector<int>& indices) {
    if (indices.empty()) throw invalid_input("no samples for feature statistics");
    const Eigen::Index channels = data[std::size_t(indices[0])].features.cols();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(channels);
    Eigen::VectorXd sum2 = Eigen::VectorXd::Zero(channels);
    long rows = 0;
    for (int idx : indices) {
        const nn::Mat& f = data[std::size_t(idx)].features;
        sum += f.colwise().sum().transpose();
        sum2 += f.array().square().colwise().sum().matrix().transpose();
        rows += f.rows();
    }
    FeatureStats st;
    st.mean = sum / double(rows);
    Eigen::VectorXd var = sum2 / double(rows) - st.mean.array().square().matrix();
    st.std_dev = var.array().max(0.0).sqrt();
    for (Eigen::Index c = 0; c < channels; ++c)
        if (st.std_dev(c) < 1e-300) st.std_dev(c) = 1.0;
    return st;
}

nn::Mat standardize(const nn::Mat& features, const FeatureStats& stats) {
    return ((features.rowwise() - stats.mean.transpose()).array().rowwise() /
            stats.std_dev.transpose().array())
        .matrix();
}

AdamW::AdamW(std::vector<nn::Param*>& params) : params_(&params) {
    for (nn::Param* p : params) {
        m_.push_back(nn::Mat::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(nn::Mat::Zero(p->value.rows(), p->value.cols()));
    }
}

void AdamW::step(double lr, double weight_decay) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, double(t_));
    const double bc2 = 1.0 - std::pow(beta2, double(t_));
    for (std::size_t i = 0; i < params_->size(); ++i) {
        nn::Param* p = (*params_)[i];
        m_[i] = beta1 * m_[i] + (1.0 - beta1) * p->grad;
        v_[i] = (beta2 * v_[i].array() + (1.0 - beta2) * p->grad.array().square()).matrix();
        nn::Mat mhat = m_[i] / bc1;
        nn::Mat vhat = v_[i] / bc2;
        p->value -=
            lr * (mhat.array() / (vhat.array().sqrt() + eps) + weight_decay * p->value.array())
                .matrix();
    }
}

namespace {

// Forward + set-match loss for a batch; optionally backpropagates.
double batch_pass(DetrModel& model, const std::vector<LabeledSample>& data,
                  const std::vector<int>& batch, const FeatureStats& stats,
                  const LossWeights& weights, const GeometryRanges& ranges, bool train) {
    const ModelConfig& mc = model.config();
    const int t = mc.tokens();
    const int b = int(batch.size());

    nn::Mat x(Eigen::Index(b) * t, mc.in_channels);
    for (int s = 0; s < b; ++s)
        x.middleRows(Eigen::Index(s) * t, t) =
            standardize(data[std::size_t(batch[std::size_t(s)])].features, stats);

    DetrModel::Output out = model.forward(x, b);

    nn::Mat d_geom, d_probs;
    if (train) {
        d_geom = nn::Mat::Zero(out.geometry.rows(), out.geometry.cols());
        d_probs = nn::Mat::Zero(out.probs.rows(), out.probs.cols());
    }

    double total = 0.0;
    const double inv_b = 1.0 / double(b);
    std::vector<SetPrediction> preds(std::size_t(mc.n_queries));
    for (int s = 0; s < b; ++s) {
        const LabeledSample& sample = data[std::size_t(batch[std::size_t(s)])];
        const Eigen::Index base = Eigen::Index(s) * mc.n_queries;
        for (int i = 0; i < mc.n_queries; ++i) {
            SetPrediction& p = preds[std::size_t(i)];
            for (int g = 0; g < 4; ++g) p.geom_norm[std::size_t(g)] = out.geometry(base + i, g);
            p.class_probs.resize(std::size_t(mc.n_classes));
            for (int c = 0; c < mc.n_classes; ++c)
                p.class_probs[std::size_t(c)] = out.probs(base + i, c);
        }
        MatchResult match = match_sets(preds, sample.targets, weights, ranges);
        SetLossGrad grad;
        LossBreakdown lb = set_loss(preds, sample.targets, match, weights, ranges,
                                    train ? &grad : nullptr);
        total += lb.total;
        if (train) {
            for (int i = 0; i < mc.n_queries; ++i) {
                for (int g = 0; g < 4; ++g)
                    d_geom(base + i, g) = grad.d_geom[std::size_t(i)][std::size_t(g)] * inv_b;
                for (int c = 0; c < mc.n_classes; ++c)
                    d_probs(base + i, c) = grad.d_probs[std::size_t(i)][std::size_t(c)] * inv_b;
            }
        }
    }
    if (train) model.backward(d_geom, d_probs);
    return total * inv_b;
}

}  // namespace

double mean_loss(DetrModel& model, const std::vector<LabeledSample>& data,
                 const std::vector<int>& indices, const FeatureStats& stats,
                 const LossWeights& weights, const GeometryRanges& ranges) {
    if (indices.empty()) return 0.0;
    const int bs = model.config().batch_size;
    double sum = 0.0;
    long count = 0;
    for (std::size_t start = 0; start < indices.size(); start += std::size_t(bs)) {
        std::vector<int> batch(indices.begin() + long(start),
                               indices.begin() +
                                   long(std::min(indices.size(), start + std::size_t(bs))));
        sum += batch_pass(model, data, batch, stats, weights, ranges, false) *
               double(batch.size());
        count += long(batch.size());
    }
    return sum / double(count);
}

TrainHistory train_model(DetrModel& model, const std::vector<LabeledSample>& data,
                         const std::vector<int>& train_idx, const std::vector<int>& val_idx,
                         const FeatureStats& stats, const LossWeights& weights,
                         const GeometryRanges& ranges, std::uint64_t shuffle_seed) {
    if (train_idx.empty()) throw invalid_input("empty training split");
    const ModelConfig& mc = model.config();
    AdamW opt(model.params());
    Rng shuffle_rng(derive_seed(shuffle_seed, {0x73687566666cULL}));

    std::vector<int> order = train_idx;
    TrainHistory hist;
    for (int epoch = 0; epoch < mc.epochs; ++epoch) {
        // Fisher-Yates with the dedicated stream.
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = shuffle_rng.uniform_index(i);
            std::swap(order[i - 1], order[j]);
        }

        double epoch_loss = 0.0;
        long seen = 0;
        for (std::size_t start = 0; start < order.size(); start += std::size_t(mc.batch_size)) {
            std::vector<int> batch(
                order.begin() + long(start),
                order.begin() + long(std::min(order.size(), start + std::size_t(mc.batch_size))));
            model.zero_grad();
            double loss = batch_pass(model, data, batch, stats, weights, ranges, true);
            if (!std::isfinite(loss))
                throw Error(Error::Kind::divergence,
                            "training diverged (non-finite loss) at epoch " +
                                std::to_string(epoch) + ", batch offset " +
                                std::to_string(start));
            opt.step(mc.learning_rate, mc.weight_decay);
            epoch_loss += loss * double(batch.size());
            seen += long(batch.size());
        }
        hist.train_loss.push_back(epoch_loss / double(seen));
        hist.val_loss.push_back(val_idx.empty()
                                    ? 0.0
                                    : mean_loss(model, data, val_idx, stats, weights, ranges));
    }
    return hist;
}

}  // namespace rfrecon
