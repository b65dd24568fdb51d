#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "chesscv/image.hpp"
#include "chesscv/layers.hpp"
#include "chesscv/network.hpp"
#include "chesscv/optim.hpp"
#include "chesscv/tensor.hpp"

namespace chesscv {

/// Labelled crop collection. Pixels are kept as float32 (datasets are the
/// memory hot spot); all arithmetic happens in double once a batch is
/// materialised.
struct Dataset {
    int channels = 3;
    int height = 0;
    int width = 0;
    std::vector<float> pixels;  // sample-major, planar CHW
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    std::size_t sample_stride() const {
        return static_cast<std::size_t>(channels) * height * width;
    }

    void append(const Image& img, int label) {
        if (size() == 0 && height == 0 && width == 0) {
            channels = img.channels;
            height = img.height;
            width = img.width;
        }
        if (img.channels != channels || img.height != height || img.width != width)
            throw std::invalid_argument("Dataset::append: shape mismatch");
        pixels.reserve(pixels.size() + sample_stride());
        for (int c = 0; c < channels; ++c)
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x)
                    pixels.push_back(static_cast<float>(img.at(x, y, c)));
        labels.push_back(label);
    }

    Image image(std::size_t i) const {
        Image img(width, height, channels);
        const float* p = pixels.data() + i * sample_stride();
        for (int c = 0; c < channels; ++c)
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x) img.at(x, y, c) = *p++;
        return img;
    }
};

struct TrainStage {
    bool head_only = false;  // update (and backprop into) only the final dense layer
    double alpha = 1e-3;
    int epochs = 1;
};

struct TrainRegimen {
    std::vector<TrainStage> stages;
    int batch_size = 128;
    int micro_batch = 16;  // gradient-accumulation chunk; bounds activation memory
    std::uint64_t seed = 1;
};

/// Per-sample augmentation hook applied while materialising batches;
/// empty function = no augmentation.
using AugmentFn = std::function<Image(const Image&, std::mt19937_64&)>;

inline Tensor image_to_tensor(const Image& img) {
    Tensor t({1, img.channels, img.height, img.width});
    double* p = t.v.data();
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) *p++ = img.at(x, y, c);
    return t;
}

namespace detail {

inline Tensor make_batch(const Dataset& d, const std::vector<std::size_t>& idx,
                         const AugmentFn& augment, std::mt19937_64& aug_rng) {
    Tensor t({static_cast<int>(idx.size()), d.channels, d.height, d.width});
    const std::size_t stride = d.sample_stride();
    for (std::size_t s = 0; s < idx.size(); ++s) {
        double* dst = t.v.data() + s * stride;
        if (augment) {
            const Image img = augment(d.image(idx[s]), aug_rng);
            if (img.channels != d.channels || img.height != d.height || img.width != d.width)
                throw std::invalid_argument("train: augmentation changed crop shape");
            const Tensor one = image_to_tensor(img);
            std::copy(one.v.begin(), one.v.end(), dst);
        } else {
            const float* src = d.pixels.data() + idx[s] * stride;
            for (std::size_t j = 0; j < stride; ++j) dst[j] = src[j];
        }
    }
    return t;
}

}  // namespace detail

/// Minibatch SGD with Adam over the given stages. Each stage gets a fresh
/// optimiser state; head-only stages update just the final dense layer.
/// Batches larger than micro_batch are processed in accumulation chunks
/// whose gradients are weighted to reproduce the whole-batch gradient, so
/// micro_batch is purely a memory bound. Returns the per-batch loss trace.
/// Deterministic for a fixed seed.
inline std::vector<double> train(Network& net, const Dataset& data, const TrainRegimen& reg,
                                 const AugmentFn& augment = {}) {
    if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
    if (reg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (reg.micro_batch < 1) throw std::invalid_argument("train: micro_batch must be >= 1");
    if (reg.stages.empty()) throw std::invalid_argument("train: need at least one stage");

    std::mt19937_64 shuffle_rng(reg.seed);
    std::mt19937_64 aug_rng(reg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<double> trace;

    std::vector<std::size_t> perm(data.size());
    std::iota(perm.begin(), perm.end(), 0);

    for (const TrainStage& stage : reg.stages) {
        const std::size_t cut = stage.head_only ? net.head_layer_index() : 0;
        AdamState opt;
        opt.alpha = stage.alpha;
        const std::vector<Tensor*> params = net.params(cut);
        const std::vector<Tensor*> grads = net.grads(cut);

        for (int epoch = 0; epoch < stage.epochs; ++epoch) {
            std::shuffle(perm.begin(), perm.end(), shuffle_rng);
            for (std::size_t start = 0; start < perm.size();
                 start += static_cast<std::size_t>(reg.batch_size)) {
                const std::size_t stop =
                    std::min(perm.size(), start + static_cast<std::size_t>(reg.batch_size));
                const double batch_n = static_cast<double>(stop - start);
                net.zero_grads();
                double batch_loss = 0.0;
                for (std::size_t cs = start; cs < stop;
                     cs += static_cast<std::size_t>(reg.micro_batch)) {
                    const std::size_t ce =
                        std::min(stop, cs + static_cast<std::size_t>(reg.micro_batch));
                    const std::vector<std::size_t> idx(perm.begin() + cs, perm.begin() + ce);
                    std::vector<int> chunk_labels(idx.size());
                    for (std::size_t i = 0; i < idx.size(); ++i)
                        chunk_labels[i] = data.labels[idx[i]];
                    const double w = static_cast<double>(idx.size()) / batch_n;

                    const Tensor x = detail::make_batch(data, idx, augment, aug_rng);
                    const std::vector<Tensor> acts = net.trace(x);
                    batch_loss += w * cross_entropy(acts.back(), chunk_labels);
                    Tensor gout = cross_entropy_grad(acts.back(), chunk_labels);
                    for (double& v : gout.v) v *= w;
                    net.backward(acts, gout, cut);
                }
                trace.push_back(batch_loss);
                adam_step(opt, params, grads);
            }
        }
    }
    return trace;
}

struct Prediction {
    int label = 0;
    double confidence = 0.0;
};

/// Single-crop inference: argmax class and its softmax probability.
inline Prediction classify(const Network& net, const Image& img) {
    const Tensor probs = net.forward(image_to_tensor(img));
    const int k = probs.dim(1);
    int best = 0;
    for (int i = 1; i < k; ++i)
        if (probs.v[i] > probs.v[best]) best = i;
    return {best, probs.v[best]};
}

/// Fraction of dataset samples whose argmax prediction matches the label.
inline double accuracy(const Network& net, const Dataset& data, int batch_size = 32) {
    if (data.size() == 0) throw std::invalid_argument("accuracy: empty dataset");
    std::size_t hits = 0;
    std::mt19937_64 unused(0);
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < data.size();
         start += static_cast<std::size_t>(batch_size)) {
        const std::size_t stop =
            std::min(data.size(), start + static_cast<std::size_t>(batch_size));
        idx.resize(stop - start);
        std::iota(idx.begin(), idx.end(), start);
        const Tensor probs = net.forward(detail::make_batch(data, idx, {}, unused));
        const int k = probs.dim(1);
        for (std::size_t s = 0; s < idx.size(); ++s) {
            const double* row = probs.v.data() + s * static_cast<std::size_t>(k);
            int best = 0;
            for (int i = 1; i < k; ++i)
                if (row[i] > row[best]) best = i;
            if (best == data.labels[idx[s]]) ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace chesscv
