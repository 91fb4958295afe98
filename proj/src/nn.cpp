#include "rfrecon/nn.hpp"

#include <cmath>

namespace rfrecon::nn {

namespace {
constexpr double kLayerNormEps = 1e-5;
}

Mat LayerNorm::forward(const Mat& x) {
    const Eigen::Index rows = x.rows(), d = x.cols();
    normalized.resize(rows, d);
    inv_std.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        double mean = x.row(r).mean();
        double var = (x.row(r).array() - mean).square().mean();
        double is = 1.0 / std::sqrt(var + kLayerNormEps);
        inv_std(r) = is;
        normalized.row(r) = ((x.row(r).array() - mean) * is).matrix();
    }
    return ((normalized.array().rowwise() * gamma.value.row(0).array()).rowwise() +
            beta.value.row(0).array())
        .matrix();
}

Mat LayerNorm::backward(const Mat& dy) {
    const Eigen::Index rows = dy.rows(), d = dy.cols();
    gamma.grad.row(0) += (dy.array() * normalized.array()).colwise().sum().matrix();
    beta.grad.row(0) += dy.colwise().sum();

    Mat dx(rows, d);
    for (Eigen::Index r = 0; r < rows; ++r) {
        auto dxhat = (dy.row(r).array() * gamma.value.row(0).array()).eval();
        double m1 = dxhat.mean();
        double m2 = (dxhat * normalized.row(r).array()).mean();
        dx.row(r) = ((dxhat - m1 - normalized.row(r).array() * m2) * inv_std(r)).matrix();
    }
    return dx;
}

Mat MultiHeadAttention::forward(const Mat& xq, const Mat& xkv, int batch_size, int tq_len,
                                int tk_len) {
    batch = batch_size;
    tq = tq_len;
    tk = tk_len;
    const int d = int(xq.cols());
    const int hd = d / heads;
    const double scale = 1.0 / std::sqrt(double(hd));

    qm = q.forward(xq);
    km = k.forward(xkv);
    vm = v.forward(xkv);

    Mat ctx(xq.rows(), d);
    attn.assign(std::size_t(batch) * std::size_t(heads), Mat());
    for (int s = 0; s < batch; ++s) {
        for (int h = 0; h < heads; ++h) {
            auto qb = qm.block(s * tq, h * hd, tq, hd);
            auto kb = km.block(s * tk, h * hd, tk, hd);
            auto vb = vm.block(s * tk, h * hd, tk, hd);
            Mat scores = qb * kb.transpose() * scale;
            Mat a = softmax_rows(scores);
            ctx.block(s * tq, h * hd, tq, hd).noalias() = a * vb;
            attn[std::size_t(s) * heads + std::size_t(h)] = std::move(a);
        }
    }
    return o.forward(ctx);
}

Mat MultiHeadAttention::backward(const Mat& dy, Mat* dxkv) {
    const int d = int(dy.cols());
    const int hd = d / heads;
    const double scale = 1.0 / std::sqrt(double(hd));

    Mat dctx = o.backward(dy);
    Mat dqm = Mat::Zero(qm.rows(), d);
    Mat dkm = Mat::Zero(km.rows(), d);
    Mat dvm = Mat::Zero(vm.rows(), d);

    for (int s = 0; s < batch; ++s) {
        for (int h = 0; h < heads; ++h) {
            const Mat& a = attn[std::size_t(s) * heads + std::size_t(h)];
            auto qb = qm.block(s * tq, h * hd, tq, hd);
            auto kb = km.block(s * tk, h * hd, tk, hd);
            auto vb = vm.block(s * tk, h * hd, tk, hd);
            auto dctx_b = dctx.block(s * tq, h * hd, tq, hd);

            Mat da = dctx_b * vb.transpose();
            dvm.block(s * tk, h * hd, tk, hd).noalias() += a.transpose() * dctx_b;
            // Row-wise softmax Jacobian.
            Eigen::ArrayXd inner = (da.array() * a.array()).rowwise().sum();
            Mat ds = (a.array() * (da.array().colwise() - inner)).matrix();
            dqm.block(s * tq, h * hd, tq, hd).noalias() += ds * kb * scale;
            dkm.block(s * tk, h * hd, tk, hd).noalias() += ds.transpose() * qb * scale;
        }
    }

    Mat dxq = q.backward(dqm);
    dxkv->noalias() += k.backward(dkm);
    dxkv->noalias() += v.backward(dvm);
    return dxq;
}

Mat EncoderLayer::forward(const Mat& x, int batch, int tokens) {
    Mat a = ln1.forward(x);
    Mat x1 = x + attn.forward(a, a, batch, tokens, tokens);
    return x1 + ff.forward(ln2.forward(x1));
}

Mat EncoderLayer::backward(const Mat& dy) {
    Mat dx1 = dy + ln2.backward(ff.backward(dy));
    Mat da_kv = Mat::Zero(dx1.rows(), dx1.cols());
    Mat da = attn.backward(dx1, &da_kv);
    da += da_kv;
    return dx1 + ln1.backward(da);
}

Mat DecoderLayer::forward(const Mat& queries, const Mat& memory, int batch, int n_queries,
                          int tokens) {
    Mat a = ln1.forward(queries);
    Mat q1 = queries + self_attn.forward(a, a, batch, n_queries, n_queries);
    Mat b = ln2.forward(q1);
    Mat q2 = q1 + cross_attn.forward(b, memory, batch, n_queries, tokens);
    return q2 + ff.forward(ln3.forward(q2));
}

Mat DecoderLayer::backward(const Mat& dy, Mat* dmem) {
    Mat dq2 = dy + ln3.backward(ff.backward(dy));
    Mat db = cross_attn.backward(dq2, dmem);
    Mat dq1 = dq2 + ln2.backward(db);
    Mat da_kv = Mat::Zero(dq1.rows(), dq1.cols());
    Mat da = self_attn.backward(dq1, &da_kv);
    da += da_kv;
    return dq1 + ln1.backward(da);
}

Mat softmax_rows(const Mat& z) {
    Mat out(z.rows(), z.cols());
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        Eigen::ArrayXd e = (z.row(r).array() - z.row(r).maxCoeff()).exp();
        out.row(r) = (e / e.sum()).matrix();
    }
    return out;
}

Mat softmax_backward(const Mat& probs, const Mat& dprobs) {
    Mat dz(probs.rows(), probs.cols());
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        double inner = (dprobs.row(r).array() * probs.row(r).array()).sum();
        dz.row(r) = (probs.row(r).array() * (dprobs.row(r).array() - inner)).matrix();
    }
    return dz;
}

Mat positional_encoding_2d(int grid_x, int grid_z, int d) {
    const int half = d / 2;
    Mat pe = Mat::Zero(Eigen::Index(grid_x) * grid_z, d);
    auto fill_axis = [&](int offset, int axis_dim, auto pos_of) {
        for (int n = 0; n < grid_x * grid_z; ++n) {
            double pos = double(pos_of(n));
            for (int i = 0; 2 * i < axis_dim; ++i) {
                double freq = std::pow(10000.0, -2.0 * i / double(axis_dim));
                pe(n, offset + 2 * i) = std::sin(pos * freq);
                if (offset + 2 * i + 1 < offset + axis_dim)
                    pe(n, offset + 2 * i + 1) = std::cos(pos * freq);
            }
        }
    };
    fill_axis(0, half, [&](int n) { return n % grid_x; });
    fill_axis(half, d - half, [&](int n) { return n / grid_x; });
    return pe;
}

}  // namespace rfrecon::nn
