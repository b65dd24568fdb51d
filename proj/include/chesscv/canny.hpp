#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "chesscv/image.hpp"

namespace chesscv {

/// Binary per-pixel edge indicator, dimensions matching the source image.
struct EdgeMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    EdgeMap() = default;
    EdgeMap(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }

    std::size_t edge_count() const {
        std::size_t n = 0;
        for (auto b : bits) n += b;
        return n;
    }
};

/// Canny edge detection on a grayscale image. Thresholds are relative to
/// the peak gradient magnitude (so they live in [0,1] regardless of input
/// contrast). Stages: 5x5 Gaussian (sigma 1.4), Sobel gradient,
/// non-maximum suppression across the gradient direction, hysteresis with
/// 8-connected linking.
inline EdgeMap canny(const Image& img, double low, double high) {
    if (img.channels != 1)
        throw std::invalid_argument("canny: expects a grayscale image");
    if (!(low >= 0.0 && low <= high && high <= 1.0))
        throw std::invalid_argument("canny: need 0 <= low <= high <= 1");

    const int w = img.width, h = img.height;
    EdgeMap edges(w, h);
    if (w < 3 || h < 3) return edges;

    const Image smooth = convolve(img, Kernel::gaussian(1.4, 5));
    const Image gx = convolve(smooth, Kernel::sobel_horizontal());
    const Image gy = convolve(smooth, Kernel::sobel_vertical());

    Image mag(w, h, 1);
    double peak = 0.0;
    for (std::size_t i = 0; i < mag.data.size(); ++i) {
        mag.data[i] = std::hypot(gx.data[i], gy.data[i]);
        peak = std::max(peak, mag.data[i]);
    }
    // Constant input up to rounding noise: smoothing a flat image leaves
    // ~1e-16 ripples which must not be normalised into "edges".
    if (peak <= 1e-9) return edges;
    for (double& v : mag.data) v /= peak;

    // Non-maximum suppression: quantise the gradient direction into four
    // bins and keep pixels that dominate both neighbours along it.
    std::vector<std::uint8_t> candidate(static_cast<std::size_t>(w) * h, 0);
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            const double m = mag.at(x, y);
            if (m < low) continue;
            double angle = std::atan2(gy.at(x, y), gx.at(x, y));
            if (angle < 0) angle += M_PI;  // direction is axial
            int dx = 1, dy = 0;
            if (angle < M_PI / 8 || angle >= 7 * M_PI / 8) {
                dx = 1; dy = 0;
            } else if (angle < 3 * M_PI / 8) {
                dx = 1; dy = 1;
            } else if (angle < 5 * M_PI / 8) {
                dx = 0; dy = 1;
            } else {
                dx = -1; dy = 1;
            }
            if (m >= mag.at(x + dx, y + dy) && m >= mag.at(x - dx, y - dy))
                candidate[static_cast<std::size_t>(y) * w + x] = 1;
        }
    }

    // Hysteresis: seed from strong pixels, grow through weak candidates.
    std::vector<std::pair<int, int>> stack;
    for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x)
            if (candidate[static_cast<std::size_t>(y) * w + x] && mag.at(x, y) >= high) {
                edges.at(x, y) = 1;
                stack.emplace_back(x, y);
            }
    while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = x + dx, ny = y + dy;
                if (nx < 1 || nx >= w - 1 || ny < 1 || ny >= h - 1) continue;
                if (edges.at(nx, ny)) continue;
                if (!candidate[static_cast<std::size_t>(ny) * w + nx]) continue;
                edges.at(nx, ny) = 1;
                stack.emplace_back(nx, ny);
            }
    }
    return edges;
}

}  // namespace chesscv
