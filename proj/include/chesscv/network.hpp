#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "chesscv/layers.hpp"
#include "chesscv/tensor.hpp"

namespace chesscv {

/// Feed-forward stack of layers ending in softmax. Copyable (deep copy),
/// so callers can snapshot a network before fine-tuning it.
class Network {
  public:
    std::vector<std::unique_ptr<Layer>> layers;
    int class_count = 0;

    Network() = default;
    Network(Network&&) = default;
    Network& operator=(Network&&) = default;
    Network(const Network& o) { *this = o; }
    Network& operator=(const Network& o) {
        if (this == &o) return *this;
        layers.clear();
        layers.reserve(o.layers.size());
        for (const auto& l : o.layers) layers.push_back(l->clone());
        class_count = o.class_count;
        return *this;
    }

    /// Inference: class probabilities for a batch.
    Tensor forward(const Tensor& x) const {
        Tensor a = x;
        for (const auto& l : layers) a = l->forward(a);
        return a;
    }

    /// Activation trace for training: trace[i] is the input to layer i,
    /// trace[layers.size()] the final output.
    std::vector<Tensor> trace(const Tensor& x) const {
        std::vector<Tensor> t;
        t.reserve(layers.size() + 1);
        t.push_back(x);
        for (const auto& l : layers) t.push_back(l->forward(t.back()));
        return t;
    }

    /// Backpropagate `gout` (gradient at the final output) down to and
    /// including layer `stop_layer`, accumulating parameter gradients.
    void backward(const std::vector<Tensor>& activations, const Tensor& gout,
                  std::size_t stop_layer = 0) {
        if (activations.size() != layers.size() + 1)
            throw std::invalid_argument("Network::backward: bad activation trace");
        Tensor g = gout;
        for (std::size_t i = layers.size(); i-- > stop_layer;)
            g = layers[i]->backward(activations[i], g);
    }

    void zero_grads() {
        for (auto& l : layers) l->zero_grads();
    }

    std::vector<Tensor*> params(std::size_t from_layer = 0) {
        std::vector<Tensor*> out;
        for (std::size_t i = from_layer; i < layers.size(); ++i)
            for (Tensor* p : layers[i]->params()) out.push_back(p);
        return out;
    }

    std::vector<Tensor*> grads(std::size_t from_layer = 0) {
        std::vector<Tensor*> out;
        for (std::size_t i = from_layer; i < layers.size(); ++i)
            for (Tensor* g : layers[i]->grads()) out.push_back(g);
        return out;
    }

    /// Index of the classification head (the last dense layer).
    std::size_t head_layer_index() const {
        for (std::size_t i = layers.size(); i-- > 0;)
            if (layers[i]->spec().kind == LayerKind::kDense) return i;
        throw std::logic_error("Network: no dense layer");
    }

    std::vector<LayerSpec> specs() const {
        std::vector<LayerSpec> out;
        out.reserve(layers.size());
        for (const auto& l : layers) out.push_back(l->spec());
        return out;
    }
};

inline std::unique_ptr<Layer> make_layer(const LayerSpec& s) {
    switch (s.kind) {
        case LayerKind::kConv: return std::make_unique<Conv2d>(s.a, s.b, s.c);
        case LayerKind::kMaxPool: return std::make_unique<MaxPool2d>();
        case LayerKind::kRelu: return std::make_unique<Relu>();
        case LayerKind::kFlatten: return std::make_unique<Flatten>();
        case LayerKind::kDense: return std::make_unique<Dense>(s.a, s.b);
        case LayerKind::kSoftmax: return std::make_unique<Softmax>();
    }
    throw std::invalid_argument("make_layer: unknown layer kind");
}

/// Three conv/relu/pool blocks (16, 32, 64 filters; 5x5, 5x5, 3x3
/// kernels, stride 1, same padding, 2x2 floor pooling) followed by
/// 1000- and 256-unit relu-activated dense layers and a softmax head.
inline Network build_cnn(int in_c, int in_h, int in_w, int classes, std::uint64_t seed) {
    Network net;
    net.class_count = classes;
    const int filters[3] = {16, 32, 64};
    const int kernels[3] = {5, 5, 3};
    int c = in_c, h = in_h, w = in_w;
    for (int blk = 0; blk < 3; ++blk) {
        net.layers.push_back(std::make_unique<Conv2d>(c, filters[blk], kernels[blk]));
        net.layers.push_back(std::make_unique<Relu>());
        net.layers.push_back(std::make_unique<MaxPool2d>());
        c = filters[blk];
        h /= 2;
        w /= 2;
    }
    net.layers.push_back(std::make_unique<Flatten>());
    net.layers.push_back(std::make_unique<Dense>(c * h * w, 1000));
    net.layers.push_back(std::make_unique<Relu>());
    net.layers.push_back(std::make_unique<Dense>(1000, 256));
    net.layers.push_back(std::make_unique<Relu>());
    net.layers.push_back(std::make_unique<Dense>(256, classes));
    net.layers.push_back(std::make_unique<Softmax>());

    std::mt19937_64 rng(seed);
    for (auto& l : net.layers) l->init(rng);
    return net;
}

/// Binary empty-vs-occupied classifier on 3x100x100 square crops.
inline Network build_occupancy_net(std::uint64_t seed = 77) {
    return build_cnn(3, 100, 100, 2, seed);
}

/// 12-class piece classifier on 3x150x100 crops (6 kinds x 2 colours).
inline Network build_piece_net(std::uint64_t seed = 78) {
    return build_cnn(3, 150, 100, 12, seed);
}

}  // namespace chesscv
