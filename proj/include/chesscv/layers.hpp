#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "chesscv/tensor.hpp"

namespace chesscv {

enum class LayerKind : std::uint8_t {
    kConv = 1,
    kMaxPool = 2,
    kRelu = 3,
    kFlatten = 4,
    kDense = 5,
    kSoftmax = 6,
};

/// Serialisable layer description; meaning of a/b/c depends on the kind
/// (conv: in channels, out channels, kernel side; dense: in, out).
struct LayerSpec {
    LayerKind kind = LayerKind::kRelu;
    int a = 0, b = 0, c = 0;
};

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMat>;
using ConstRowMap = Eigen::Map<const RowMat>;

/// Differentiable network layer. forward is pure; backward takes the same
/// input the forward pass saw plus the upstream gradient, returns the
/// input gradient, and accumulates parameter gradients internally.
class Layer {
  public:
    virtual ~Layer() = default;
    virtual LayerSpec spec() const = 0;
    virtual Tensor forward(const Tensor& x) const = 0;
    virtual Tensor backward(const Tensor& x, const Tensor& gy) = 0;
    virtual std::vector<Tensor*> params() { return {}; }
    virtual std::vector<Tensor*> grads() { return {}; }
    virtual void init(std::mt19937_64&) {}
    virtual std::unique_ptr<Layer> clone() const = 0;

    void zero_grads() {
        for (Tensor* g : grads()) g->fill(0.0);
    }

    std::vector<const Tensor*> const_params() const {
        std::vector<const Tensor*> out;
        for (Tensor* t : const_cast<Layer*>(this)->params()) out.push_back(t);
        return out;
    }
};

namespace detail {

inline void expect_rank(const Tensor& t, std::size_t rank, const char* who) {
    if (t.shape.size() != rank)
        throw std::invalid_argument(std::string(who) + ": unexpected tensor rank");
}

/// Patch matrix for same-padding convolution: row (c*k+dy)*k+dx, column
/// y*W+x holds input[c, y+dy-p, x+dx-p] (zero outside the image).
inline RowMat im2col(const double* x, int c_in, int h, int w, int k) {
    const int p = k / 2;
    RowMat m = RowMat::Zero(static_cast<Eigen::Index>(c_in) * k * k,
                            static_cast<Eigen::Index>(h) * w);
    for (int c = 0; c < c_in; ++c)
        for (int dy = 0; dy < k; ++dy)
            for (int dx = 0; dx < k; ++dx) {
                const Eigen::Index row = (static_cast<Eigen::Index>(c) * k + dy) * k + dx;
                for (int y = 0; y < h; ++y) {
                    const int sy = y + dy - p;
                    if (sy < 0 || sy >= h) continue;
                    const int x_lo = std::max(0, p - dx);
                    const int x_hi = std::min(w, w + p - dx);
                    const double* src = x + (static_cast<std::size_t>(c) * h + sy) * w;
                    double* dst = m.data() + row * m.cols() + static_cast<Eigen::Index>(y) * w;
                    for (int xx = x_lo; xx < x_hi; ++xx) dst[xx] = src[xx + dx - p];
                }
            }
    return m;
}

/// Transpose of im2col: scatter-add patch gradients back onto the input.
inline void col2im_add(const RowMat& m, double* gx, int c_in, int h, int w, int k) {
    const int p = k / 2;
    for (int c = 0; c < c_in; ++c)
        for (int dy = 0; dy < k; ++dy)
            for (int dx = 0; dx < k; ++dx) {
                const Eigen::Index row = (static_cast<Eigen::Index>(c) * k + dy) * k + dx;
                for (int y = 0; y < h; ++y) {
                    const int sy = y + dy - p;
                    if (sy < 0 || sy >= h) continue;
                    const int x_lo = std::max(0, p - dx);
                    const int x_hi = std::min(w, w + p - dx);
                    const double* src =
                        m.data() + row * m.cols() + static_cast<Eigen::Index>(y) * w;
                    double* dst = gx + (static_cast<std::size_t>(c) * h + sy) * w;
                    for (int xx = x_lo; xx < x_hi; ++xx) dst[xx + dx - p] += src[xx];
                }
            }
}

}  // namespace detail

/// Same-padding, stride-1 convolution. Weights are [out_c, in_c, k, k].
class Conv2d : public Layer {
  public:
    Conv2d(int in_c, int out_c, int k)
        : in_c_(in_c), out_c_(out_c), k_(k), w_({out_c, in_c, k, k}), b_({out_c}),
          gw_({out_c, in_c, k, k}), gb_({out_c}) {
        if (in_c < 1 || out_c < 1 || k < 1 || k % 2 == 0)
            throw std::invalid_argument("Conv2d: bad hyperparameters");
    }

    LayerSpec spec() const override { return {LayerKind::kConv, in_c_, out_c_, k_}; }

    Tensor forward(const Tensor& x) const override {
        detail::expect_rank(x, 4, "Conv2d");
        if (x.dim(1) != in_c_) throw std::invalid_argument("Conv2d: channel mismatch");
        const int batch = x.dim(0), h = x.dim(2), w = x.dim(3);
        Tensor y({batch, out_c_, h, w});
        const std::size_t in_stride = static_cast<std::size_t>(in_c_) * h * w;
        const std::size_t out_stride = static_cast<std::size_t>(out_c_) * h * w;
        ConstRowMap wm(w_.v.data(), out_c_, static_cast<Eigen::Index>(in_c_) * k_ * k_);
        for (int s = 0; s < batch; ++s) {
            const RowMat m = detail::im2col(x.v.data() + s * in_stride, in_c_, h, w, k_);
            RowMap ym(y.v.data() + s * out_stride, out_c_, static_cast<Eigen::Index>(h) * w);
            ym.noalias() = wm * m;
            for (int o = 0; o < out_c_; ++o) ym.row(o).array() += b_.v[o];
        }
        return y;
    }

    Tensor backward(const Tensor& x, const Tensor& gy) override {
        const int batch = x.dim(0), h = x.dim(2), w = x.dim(3);
        Tensor gx(x.shape);
        const std::size_t in_stride = static_cast<std::size_t>(in_c_) * h * w;
        const std::size_t out_stride = static_cast<std::size_t>(out_c_) * h * w;
        ConstRowMap wm(w_.v.data(), out_c_, static_cast<Eigen::Index>(in_c_) * k_ * k_);
        RowMap gwm(gw_.v.data(), out_c_, static_cast<Eigen::Index>(in_c_) * k_ * k_);
        for (int s = 0; s < batch; ++s) {
            const RowMat m = detail::im2col(x.v.data() + s * in_stride, in_c_, h, w, k_);
            ConstRowMap gym(gy.v.data() + s * out_stride, out_c_,
                            static_cast<Eigen::Index>(h) * w);
            gwm.noalias() += gym * m.transpose();
            for (int o = 0; o < out_c_; ++o) gb_.v[o] += gym.row(o).sum();
            const RowMat gm = wm.transpose() * gym;
            detail::col2im_add(gm, gx.v.data() + s * in_stride, in_c_, h, w, k_);
        }
        return gx;
    }

    std::vector<Tensor*> params() override { return {&w_, &b_}; }
    std::vector<Tensor*> grads() override { return {&gw_, &gb_}; }

    void init(std::mt19937_64& rng) override {
        const double stddev = std::sqrt(2.0 / (static_cast<double>(in_c_) * k_ * k_));
        std::normal_distribution<double> dist(0.0, stddev);
        for (double& v : w_.v) v = dist(rng);
        b_.fill(0.0);
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

  private:
    int in_c_, out_c_, k_;
    Tensor w_, b_, gw_, gb_;
};

/// 2x2 max pooling with stride 2; odd trailing rows/columns are dropped
/// (floor semantics). Ties resolve to the first maximal cell in scan
/// order, consistently in forward and backward.
class MaxPool2d : public Layer {
  public:
    LayerSpec spec() const override { return {LayerKind::kMaxPool, 0, 0, 0}; }

    Tensor forward(const Tensor& x) const override {
        detail::expect_rank(x, 4, "MaxPool2d");
        const int batch = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
        const int ho = h / 2, wo = w / 2;
        if (ho == 0 || wo == 0) throw std::invalid_argument("MaxPool2d: input too small");
        Tensor y({batch, c, ho, wo});
        for (int s = 0; s < batch; ++s)
            for (int ch = 0; ch < c; ++ch) {
                const double* xp =
                    x.v.data() + (static_cast<std::size_t>(s) * c + ch) * h * w;
                double* yp = y.v.data() + (static_cast<std::size_t>(s) * c + ch) * ho * wo;
                for (int oy = 0; oy < ho; ++oy)
                    for (int ox = 0; ox < wo; ++ox) {
                        double m = xp[(2 * oy) * w + 2 * ox];
                        m = std::max(m, xp[(2 * oy) * w + 2 * ox + 1]);
                        m = std::max(m, xp[(2 * oy + 1) * w + 2 * ox]);
                        m = std::max(m, xp[(2 * oy + 1) * w + 2 * ox + 1]);
                        yp[oy * wo + ox] = m;
                    }
            }
        return y;
    }

    Tensor backward(const Tensor& x, const Tensor& gy) override {
        const int batch = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
        const int ho = h / 2, wo = w / 2;
        Tensor gx(x.shape);
        for (int s = 0; s < batch; ++s)
            for (int ch = 0; ch < c; ++ch) {
                const double* xp =
                    x.v.data() + (static_cast<std::size_t>(s) * c + ch) * h * w;
                const double* gp =
                    gy.v.data() + (static_cast<std::size_t>(s) * c + ch) * ho * wo;
                double* op = gx.v.data() + (static_cast<std::size_t>(s) * c + ch) * h * w;
                for (int oy = 0; oy < ho; ++oy)
                    for (int ox = 0; ox < wo; ++ox) {
                        int by = 2 * oy, bx = 2 * ox;
                        double m = xp[by * w + bx];
                        if (xp[(2 * oy) * w + 2 * ox + 1] > m) {
                            m = xp[(2 * oy) * w + 2 * ox + 1];
                            by = 2 * oy;
                            bx = 2 * ox + 1;
                        }
                        if (xp[(2 * oy + 1) * w + 2 * ox] > m) {
                            m = xp[(2 * oy + 1) * w + 2 * ox];
                            by = 2 * oy + 1;
                            bx = 2 * ox;
                        }
                        if (xp[(2 * oy + 1) * w + 2 * ox + 1] > m) {
                            by = 2 * oy + 1;
                            bx = 2 * ox + 1;
                        }
                        op[by * w + bx] += gp[oy * wo + ox];
                    }
            }
        return gx;
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool2d>(*this); }
};

class Relu : public Layer {
  public:
    LayerSpec spec() const override { return {LayerKind::kRelu, 0, 0, 0}; }

    Tensor forward(const Tensor& x) const override {
        Tensor y = x;
        for (double& v : y.v) v = std::max(0.0, v);
        return y;
    }

    Tensor backward(const Tensor& x, const Tensor& gy) override {
        Tensor gx = gy;
        for (std::size_t i = 0; i < gx.v.size(); ++i)
            if (x.v[i] <= 0.0) gx.v[i] = 0.0;
        return gx;
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }
};

/// [batch, c, h, w] -> [batch, c*h*w].
class Flatten : public Layer {
  public:
    LayerSpec spec() const override { return {LayerKind::kFlatten, 0, 0, 0}; }

    Tensor forward(const Tensor& x) const override {
        detail::expect_rank(x, 4, "Flatten");
        return x.reshaped({x.dim(0), x.dim(1) * x.dim(2) * x.dim(3)});
    }

    Tensor backward(const Tensor& x, const Tensor& gy) override {
        return gy.reshaped(x.shape);
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }
};

/// Affine map on flattened activations: y = x W^T + b, weights [out, in].
class Dense : public Layer {
  public:
    Dense(int in, int out)
        : in_(in), out_(out), w_({out, in}), b_({out}), gw_({out, in}), gb_({out}) {
        if (in < 1 || out < 1) throw std::invalid_argument("Dense: bad sizes");
    }

    LayerSpec spec() const override { return {LayerKind::kDense, in_, out_, 0}; }

    Tensor forward(const Tensor& x) const override {
        detail::expect_rank(x, 2, "Dense");
        if (x.dim(1) != in_) throw std::invalid_argument("Dense: width mismatch");
        const int batch = x.dim(0);
        Tensor y({batch, out_});
        ConstRowMap xm(x.v.data(), batch, in_);
        ConstRowMap wm(w_.v.data(), out_, in_);
        RowMap ym(y.v.data(), batch, out_);
        ym.noalias() = xm * wm.transpose();
        for (int o = 0; o < out_; ++o) ym.col(o).array() += b_.v[o];
        return y;
    }

    Tensor backward(const Tensor& x, const Tensor& gy) override {
        const int batch = x.dim(0);
        Tensor gx(x.shape);
        ConstRowMap xm(x.v.data(), batch, in_);
        ConstRowMap wm(w_.v.data(), out_, in_);
        ConstRowMap gym(gy.v.data(), batch, out_);
        RowMap gxm(gx.v.data(), batch, in_);
        RowMap gwm(gw_.v.data(), out_, in_);
        gxm.noalias() = gym * wm;
        gwm.noalias() += gym.transpose() * xm;
        for (int o = 0; o < out_; ++o) gb_.v[o] += gym.col(o).sum();
        return gx;
    }

    std::vector<Tensor*> params() override { return {&w_, &b_}; }
    std::vector<Tensor*> grads() override { return {&gw_, &gb_}; }

    void init(std::mt19937_64& rng) override {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / in_));
        for (double& v : w_.v) v = dist(rng);
        b_.fill(0.0);
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

  private:
    int in_, out_;
    Tensor w_, b_, gw_, gb_;
};

/// Row-wise softmax over the class axis, numerically stabilised.
class Softmax : public Layer {
  public:
    LayerSpec spec() const override { return {LayerKind::kSoftmax, 0, 0, 0}; }

    Tensor forward(const Tensor& x) const override {
        detail::expect_rank(x, 2, "Softmax");
        Tensor y = x;
        const int batch = x.dim(0), k = x.dim(1);
        for (int s = 0; s < batch; ++s) {
            double* row = y.v.data() + static_cast<std::size_t>(s) * k;
            const double m = *std::max_element(row, row + k);
            double sum = 0.0;
            for (int i = 0; i < k; ++i) {
                row[i] = std::exp(row[i] - m);
                sum += row[i];
            }
            for (int i = 0; i < k; ++i) row[i] /= sum;
        }
        return y;
    }

    Tensor backward(const Tensor& x, const Tensor& gy) override {
        const Tensor p = forward(x);
        const int batch = x.dim(0), k = x.dim(1);
        Tensor gx(x.shape);
        for (int s = 0; s < batch; ++s) {
            const double* pr = p.v.data() + static_cast<std::size_t>(s) * k;
            const double* gr = gy.v.data() + static_cast<std::size_t>(s) * k;
            double* o = gx.v.data() + static_cast<std::size_t>(s) * k;
            double dot = 0.0;
            for (int i = 0; i < k; ++i) dot += gr[i] * pr[i];
            for (int i = 0; i < k; ++i) o[i] = pr[i] * (gr[i] - dot);
        }
        return gx;
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<Softmax>(*this); }
};

/// Mean negative log-likelihood over the batch, probabilities clamped at
/// 1e-12. Rows must already be normalised (softmax output).
inline double cross_entropy(const Tensor& probs, const std::vector<int>& labels) {
    detail::expect_rank(probs, 2, "cross_entropy");
    const int batch = probs.dim(0), k = probs.dim(1);
    if (static_cast<int>(labels.size()) != batch)
        throw std::invalid_argument("cross_entropy: label count != batch");
    double loss = 0.0;
    for (int s = 0; s < batch; ++s) {
        if (labels[s] < 0 || labels[s] >= k)
            throw std::invalid_argument("cross_entropy: label out of range");
        const double* row = probs.v.data() + static_cast<std::size_t>(s) * k;
        double sum = 0.0;
        for (int i = 0; i < k; ++i) sum += row[i];
        if (std::fabs(sum - 1.0) > 1e-6)
            throw std::invalid_argument("cross_entropy: probabilities must sum to 1");
        loss += -std::log(std::max(row[labels[s]], 1e-12));
    }
    return loss / batch;
}

/// Gradient of cross_entropy with respect to the probabilities.
inline Tensor cross_entropy_grad(const Tensor& probs, const std::vector<int>& labels) {
    const int batch = probs.dim(0), k = probs.dim(1);
    Tensor g(probs.shape);
    for (int s = 0; s < batch; ++s) {
        const double p = probs.v[static_cast<std::size_t>(s) * k + labels[s]];
        g.v[static_cast<std::size_t>(s) * k + labels[s]] =
            -1.0 / (batch * std::max(p, 1e-12));
    }
    return g;
}

}  // namespace chesscv
