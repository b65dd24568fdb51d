#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "chesscv/tensor.hpp"

namespace chesscv {

/// Adam optimiser state over a fixed parameter list. Moment tensors are
/// lazily shaped from the first step's parameters.
struct AdamState {
    double alpha = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long t = 0;
    std::vector<Tensor> m, v;
};

/// One bias-corrected Adam update:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
///   p <- p - alpha * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
inline void adam_step(AdamState& state, const std::vector<Tensor*>& params,
                      const std::vector<Tensor*>& grads) {
    if (params.size() != grads.size())
        throw std::invalid_argument("adam_step: parameter/gradient count mismatch");
    if (state.m.empty()) {
        for (const Tensor* p : params) {
            state.m.emplace_back(p->shape);
            state.v.emplace_back(p->shape);
        }
    }
    if (state.m.size() != params.size())
        throw std::invalid_argument("adam_step: state does not match parameter list");

    ++state.t;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        if (p.numel() != g.numel() || p.numel() != m.numel())
            throw std::invalid_argument("adam_step: shape mismatch");
        for (std::size_t j = 0; j < p.numel(); ++j) {
            m.v[j] = state.beta1 * m.v[j] + (1.0 - state.beta1) * g.v[j];
            v.v[j] = state.beta2 * v.v[j] + (1.0 - state.beta2) * g.v[j] * g.v[j];
            const double mhat = m.v[j] / bc1;
            const double vhat = v.v[j] / bc2;
            p.v[j] -= state.alpha * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace chesscv
