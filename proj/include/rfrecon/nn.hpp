#pragma once
// Hand-written transformer building blocks with explicit reverse-mode
// backward passes. Eigen supplies the dense products; all layer logic,
// caching and gradient math lives here. Activations are batch-stacked:
// rows [s*T, (s+1)*T) belong to sample s.

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace rfrecon::nn {

using Mat = Eigen::MatrixXd;

struct Param {
    std::string name;
    Mat value;
    Mat grad;

    void init_shape(const std::string& n, Eigen::Index rows, Eigen::Index cols) {
        name = n;
        value.setZero(rows, cols);
        grad.setZero(rows, cols);
    }
};

struct Linear {
    Param weight;  // in x out
    Param bias;    // 1 x out
    Mat input;     // cache

    void init(const std::string& name, int in, int out) {
        weight.init_shape(name + ".weight", in, out);
        bias.init_shape(name + ".bias", 1, out);
    }
    Mat forward(const Mat& x) {
        input = x;
        return (x * weight.value).rowwise() + bias.value.row(0);
    }
    Mat backward(const Mat& dy) {
        weight.grad.noalias() += input.transpose() * dy;
        bias.grad.row(0) += dy.colwise().sum();
        return dy * weight.value.transpose();
    }
};

struct LayerNorm {
    Param gamma, beta;  // 1 x d
    Mat normalized;     // cache
    Eigen::VectorXd inv_std;

    void init(const std::string& name, int d) {
        gamma.init_shape(name + ".gamma", 1, d);
        beta.init_shape(name + ".beta", 1, d);
        gamma.value.setOnes();
    }
    Mat forward(const Mat& x);
    Mat backward(const Mat& dy);
};

struct MultiHeadAttention {
    Linear q, k, v, o;
    int heads = 1;
    int tq = 0, tk = 0, batch = 0;
    Mat qm, km, vm;           // projected caches
    std::vector<Mat> attn;    // softmax weights per (sample, head)

    void init(const std::string& name, int d, int n_heads) {
        heads = n_heads;
        q.init(name + ".q", d, d);
        k.init(name + ".k", d, d);
        v.init(name + ".v", d, d);
        o.init(name + ".o", d, d);
    }
    // xq: (batch*tq) x d, xkv: (batch*tk) x d
    Mat forward(const Mat& xq, const Mat& xkv, int batch_size, int tq_len, int tk_len);
    // Returns d(xq); d(xkv) accumulated into *dxkv.
    Mat backward(const Mat& dy, Mat* dxkv);
};

struct FeedForward {
    Linear expand, contract;
    Mat hidden;  // post-ReLU cache

    void init(const std::string& name, int d, int ff) {
        expand.init(name + ".expand", d, ff);
        contract.init(name + ".contract", ff, d);
    }
    Mat forward(const Mat& x) {
        hidden = expand.forward(x).cwiseMax(0.0);
        return contract.forward(hidden);
    }
    Mat backward(const Mat& dy) {
        Mat dh = contract.backward(dy);
        dh = (hidden.array() > 0.0).cast<double>().array() * dh.array();
        return expand.backward(dh);
    }
};

// Pre-norm encoder layer: x += attn(ln1(x)); x += ff(ln2(x)).
struct EncoderLayer {
    LayerNorm ln1, ln2;
    MultiHeadAttention attn;
    FeedForward ff;

    void init(const std::string& name, int d, int heads, int ff_dim) {
        ln1.init(name + ".ln1", d);
        ln2.init(name + ".ln2", d);
        attn.init(name + ".attn", d, heads);
        ff.init(name + ".ff", d, ff_dim);
    }
    Mat forward(const Mat& x, int batch, int tokens);
    Mat backward(const Mat& dy);
};

// Pre-norm decoder layer: self-attention, cross-attention into memory, FF.
struct DecoderLayer {
    LayerNorm ln1, ln2, ln3;
    MultiHeadAttention self_attn, cross_attn;
    FeedForward ff;

    void init(const std::string& name, int d, int heads, int ff_dim) {
        ln1.init(name + ".ln1", d);
        ln2.init(name + ".ln2", d);
        ln3.init(name + ".ln3", d);
        self_attn.init(name + ".self", d, heads);
        cross_attn.init(name + ".cross", d, heads);
        ff.init(name + ".ff", d, ff_dim);
    }
    Mat forward(const Mat& queries, const Mat& memory, int batch, int n_queries, int tokens);
    // Returns d(queries); d(memory) accumulated into *dmem.
    Mat backward(const Mat& dy, Mat* dmem);
};

Mat softmax_rows(const Mat& z);

// d(loss)/d(logits) from d(loss)/d(probabilities) through the softmax Jacobian.
Mat softmax_backward(const Mat& probs, const Mat& dprobs);

// Fixed 2D sinusoidal positional encoding over a (gx, gz) grid, token index
// n = gz * grid_x + gx; first half of the channels encodes gx, second gz.
Mat positional_encoding_2d(int grid_x, int grid_z, int d);

}  // namespace rfrecon::nn
