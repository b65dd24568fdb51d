#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace chesscv {

/// Dense row-major n-dimensional array of doubles. Shape conventions in
/// this library: feature maps are [batch, channels, height, width],
/// flattened activations are [batch, features].
struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), v(checked_numel(shape), 0.0) {}
    Tensor(std::vector<int> s, std::vector<double> values)
        : shape(std::move(s)), v(std::move(values)) {
        if (v.size() != checked_numel(shape))
            throw std::invalid_argument("Tensor: value count does not match shape");
    }

    static std::size_t checked_numel(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) {
            if (d <= 0) throw std::invalid_argument("Tensor: non-positive extent");
            n *= static_cast<std::size_t>(d);
        }
        return n;
    }

    std::size_t numel() const { return v.size(); }
    int dim(std::size_t i) const { return shape.at(i); }

    /// Reinterpret the same buffer under a new shape of equal volume.
    Tensor reshaped(std::vector<int> s) const {
        if (checked_numel(s) != v.size())
            throw std::invalid_argument("Tensor: reshape changes volume");
        Tensor t;
        t.shape = std::move(s);
        t.v = v;
        return t;
    }

    void fill(double x) { std::fill(v.begin(), v.end(), x); }
};

}  // namespace chesscv
