#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace chesscv {

/// Dense raster of intensities in [0,1], row-major, channel-interleaved.
/// Channel count is 1 (grayscale) or 3 (RGB). Filter outputs may carry
/// values outside [0,1]; the unit range is the contract at pipeline
/// boundaries (loading, rendering), not a hard internal clamp.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, fill) {
        if (w < 0 || h < 0 || (c != 1 && c != 3))
            throw std::invalid_argument("Image: bad dimensions");
    }

    double& at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * height;
    }
    bool same_size(const Image& o) const {
        return width == o.width && height == o.height;
    }
};

/// Square convolution kernel with odd side (centre-defined).
struct Kernel {
    int side = 1;
    std::vector<double> weights;

    Kernel() : weights(1, 0.0) {}
    Kernel(int s, std::vector<double> w) : side(s), weights(std::move(w)) {
        if (side < 1 || side % 2 == 0)
            throw std::invalid_argument("Kernel: side must be odd and positive");
        if (weights.size() != static_cast<std::size_t>(side) * side)
            throw std::invalid_argument("Kernel: weight count != side*side");
    }

    double at(int i, int j) const { return weights[static_cast<std::size_t>(i) * side + j]; }

    static Kernel identity(int s = 3) {
        Kernel k(s, std::vector<double>(static_cast<std::size_t>(s) * s, 0.0));
        k.weights[(s / 2) * s + s / 2] = 1.0;
        return k;
    }
    static Kernel sobel_horizontal() {
        return Kernel(3, {-1, 0, 1, -2, 0, 2, -1, 0, 1});
    }
    static Kernel sobel_vertical() {
        return Kernel(3, {-1, -2, -1, 0, 0, 0, 1, 2, 1});
    }
    /// Sampled Gaussian, normalised to unit sum.
    static Kernel gaussian(double sigma, int s) {
        Kernel k(s, std::vector<double>(static_cast<std::size_t>(s) * s, 0.0));
        const int r = s / 2;
        double sum = 0.0;
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) {
                const double dy = i - r, dx = j - r;
                const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
                k.weights[static_cast<std::size_t>(i) * s + j] = v;
                sum += v;
            }
        for (double& w : k.weights) w /= sum;
        return k;
    }
};

/// Rec.601 luma. 1-channel input passes through unchanged.
inline Image to_grayscale(const Image& img) {
    if (img.channels == 1) return img;
    Image out(img.width, img.height, 1);
    const double* p = img.data.data();
    for (std::size_t i = 0, n = img.pixel_count(); i < n; ++i, p += 3)
        out.data[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    return out;
}

/// 2D correlation-style convolution with clamp-to-edge borders.
/// Output is same-size and may hold signed values.
inline Image convolve(const Image& img, const Kernel& k) {
    if (img.channels != 1)
        throw std::invalid_argument("convolve: expects a single-channel image");
    if (k.side > img.width || k.side > img.height)
        throw std::invalid_argument("convolve: kernel larger than image");
    Image out(img.width, img.height, 1);
    const int r = k.side / 2;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                const int yy = std::clamp(y + i, 0, img.height - 1);
                for (int j = -r; j <= r; ++j) {
                    const int xx = std::clamp(x + j, 0, img.width - 1);
                    acc += k.at(i + r, j + r) * img.at(xx, yy);
                }
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

/// Absolute horizontal-gradient magnitude (Sobel), rescaled so the peak
/// response is 1. A constant image stays all-zero.
inline Image sobel_x(const Image& img) {
    if (img.channels != 1)
        throw std::invalid_argument("sobel_x: expects a grayscale image");
    Image g = convolve(img, Kernel::sobel_horizontal());
    double peak = 0.0;
    for (double& v : g.data) {
        v = std::fabs(v);
        peak = std::max(peak, v);
    }
    if (peak > 0.0)
        for (double& v : g.data) v /= peak;
    return g;
}

/// Absolute vertical-gradient magnitude (Sobel), rescaled so the peak
/// response is 1. A constant image stays all-zero.
inline Image sobel_y(const Image& img) {
    if (img.channels != 1)
        throw std::invalid_argument("sobel_y: expects a grayscale image");
    Image g = convolve(img, Kernel::sobel_vertical());
    double peak = 0.0;
    for (double& v : g.data) {
        v = std::fabs(v);
        peak = std::max(peak, v);
    }
    if (peak > 0.0)
        for (double& v : g.data) v /= peak;
    return g;
}

/// Bilinear sample at (x, y) with clamp-to-edge; coordinates are in pixel
/// units where (0,0) is the centre of the top-left pixel.
inline double sample_bilinear(const Image& img, double x, double y, int c = 0) {
    const double cx = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    const double cy = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    const int x0 = static_cast<int>(std::floor(cx));
    const int y0 = static_cast<int>(std::floor(cy));
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fx = cx - x0, fy = cy - y0;
    const double top = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
    const double bot = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
    return top * (1.0 - fy) + bot * fy;
}

/// Bilinear resize preserving channel count.
inline Image resize_bilinear(const Image& img, int w, int h) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("resize_bilinear: bad size");
    Image out(w, h, img.channels);
    const double sx = static_cast<double>(img.width) / w;
    const double sy = static_cast<double>(img.height) / h;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double srcx = (x + 0.5) * sx - 0.5;
            const double srcy = (y + 0.5) * sy - 0.5;
            for (int c = 0; c < img.channels; ++c)
                out.at(x, y, c) = sample_bilinear(img, srcx, srcy, c);
        }
    return out;
}

/// Shrink so the longer side equals `long_side` (no-op when already
/// smaller). Returns the applied scale factor via `scale_out`.
inline Image shrink_to_long_side(const Image& img, int long_side, double* scale_out = nullptr) {
    const int longer = std::max(img.width, img.height);
    if (longer <= long_side) {
        if (scale_out) *scale_out = 1.0;
        return img;
    }
    const double s = static_cast<double>(long_side) / longer;
    if (scale_out) *scale_out = s;
    return resize_bilinear(img, std::max(1, static_cast<int>(std::lround(img.width * s))),
                           std::max(1, static_cast<int>(std::lround(img.height * s))));
}

inline Image flip_horizontal(const Image& img) {
    Image out(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(x, y, c) = img.at(img.width - 1 - x, y, c);
    return out;
}

inline void clamp_unit_range(Image& img) {
    for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace chesscv
