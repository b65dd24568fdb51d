#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "chesscv/image.hpp"
#include "chesscv/train.hpp"

namespace chesscv {

/// Symmetric draw ranges for piece-crop augmentation; every field is the
/// half-width of a uniform interval about the identity.
struct AugmentSpec {
    double shear_rad = 0.35;      // horizontal shear about the bottom edge
    double scale = 0.10;          // isotropic scale about the bottom-left corner
    double translate_frac = 0.05; // shift as a fraction of width / height
    double brightness = 0.2;
    double contrast = 0.2;
    double saturation = 0.2;
    double hue = 0.05;            // hue rotation, fraction of a full turn
    std::uint64_t seed = 0;       // base seed for consumers that self-seed

    void validate() const {
        if (shear_rad < 0.0 || shear_rad >= M_PI / 2)
            throw std::invalid_argument("AugmentSpec: shear_rad must lie in [0, pi/2)");
        if (scale < 0.0 || scale >= 1.0)
            throw std::invalid_argument("AugmentSpec: scale must lie in [0, 1)");
        if (translate_frac < 0.0 || brightness < 0.0 || contrast < 0.0 ||
            saturation < 0.0)
            throw std::invalid_argument("AugmentSpec: ranges must be non-negative");
        if (hue < 0.0 || hue > 0.5)
            throw std::invalid_argument("AugmentSpec: hue must lie in [0, 0.5]");
    }
};

namespace detail {

/// h in [0,1), s and v in [0,1].
inline void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double d = mx - mn;
    v = mx;
    s = mx > 0.0 ? d / mx : 0.0;
    if (d <= 0.0) {
        h = 0.0;
        return;
    }
    if (mx == r)
        h = std::fmod((g - b) / d, 6.0);
    else if (mx == g)
        h = (b - r) / d + 2.0;
    else
        h = (r - g) / d + 4.0;
    h /= 6.0;
    if (h < 0.0) h += 1.0;
}

inline void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
    h = h - std::floor(h);
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r1 = 0, g1 = 0, b1 = 0;
    if (hp < 1)      { r1 = c; g1 = x; }
    else if (hp < 2) { r1 = x; g1 = c; }
    else if (hp < 3) { g1 = c; b1 = x; }
    else if (hp < 4) { g1 = x; b1 = c; }
    else if (hp < 5) { r1 = x; b1 = c; }
    else             { r1 = c; b1 = x; }
    const double m = v - c;
    r = r1 + m;
    g = g1 + m;
    b = b1 + m;
}

}  // namespace detail

/// Horizontal shear anchored at the bottom edge: row y shifts by
/// tan(angle) * (H-1-y), so the bottom row is returned bitwise unchanged.
/// Pixels sampled from outside the source are black.
inline Image shear_anchored(const Image& img, double angle_rad) {
    if (std::fabs(angle_rad) >= M_PI / 2)
        throw std::invalid_argument("shear_anchored: |angle| must be < pi/2");
    const double t = std::tan(angle_rad);
    Image out(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y) {
        const double shift = t * (img.height - 1 - y);
        for (int x = 0; x < img.width; ++x) {
            const double sx = x - shift;
            if (sx < 0.0 || sx > img.width - 1) continue;  // stays black
            for (int c = 0; c < img.channels; ++c)
                out.at(x, y, c) = sample_bilinear(img, sx, y, c);
        }
    }
    return out;
}

/// Photometric jitter: brightness shift, contrast scaling about the global
/// mean, then saturation scaling and hue rotation in HSV space (3-channel
/// images only for the HSV step). Result is clamped to [0, 1].
inline Image color_jitter(const Image& img, double brightness, double contrast,
                          double saturation, double hue) {
    Image out = img;
    double mean = 0.0;
    for (double v : out.data) mean += v;
    mean = out.data.empty() ? 0.0 : mean / static_cast<double>(out.data.size());
    mean += brightness;
    for (double& v : out.data) v = mean + (v + brightness - mean) * (1.0 + contrast);

    if ((saturation != 0.0 || hue != 0.0) && out.channels == 3) {
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x) {
                double r = std::clamp(out.at(x, y, 0), 0.0, 1.0);
                double g = std::clamp(out.at(x, y, 1), 0.0, 1.0);
                double b = std::clamp(out.at(x, y, 2), 0.0, 1.0);
                double h, s, v;
                detail::rgb_to_hsv(r, g, b, h, s, v);
                s = std::clamp(s * (1.0 + saturation), 0.0, 1.0);
                h += hue;
                detail::hsv_to_rgb(h, s, v, r, g, b);
                out.at(x, y, 0) = r;
                out.at(x, y, 1) = g;
                out.at(x, y, 2) = b;
            }
    }
    clamp_unit_range(out);
    return out;
}

/// Photometric jitter with magnitudes drawn uniformly from the spec ranges
/// (order: brightness, contrast, saturation, hue).
inline Image color_jitter(const Image& img, const AugmentSpec& spec, std::mt19937_64& rng) {
    spec.validate();
    const auto draw = [&rng](double range) {
        std::uniform_real_distribution<double> d(-range, range);
        return d(rng);
    };
    const double b = draw(spec.brightness);
    const double c = draw(spec.contrast);
    const double s = draw(spec.saturation);
    const double h = draw(spec.hue);
    return color_jitter(img, b, c, s, h);
}

/// Training-time augmenter for piece crops: photometric jitter followed by
/// one composed affine warp (shear about the bottom edge, scale about the
/// bottom-left corner, translation), resampled once. Draw order is fixed
/// (shear, scale, tx, ty, brightness, contrast, saturation, hue) so a given
/// rng state always produces the same transform.
inline AugmentFn make_piece_augmenter(const AugmentSpec& spec = {}) {
    spec.validate();
    return [spec](const Image& img, std::mt19937_64& rng) -> Image {
        const auto draw = [&rng](double range) {
            std::uniform_real_distribution<double> d(-range, range);
            return d(rng);
        };
        const double shear = draw(spec.shear_rad);
        const double scale = 1.0 + draw(spec.scale);
        const double tx = draw(spec.translate_frac) * img.width;
        const double ty = draw(spec.translate_frac) * img.height;
        const double brightness = draw(spec.brightness);
        const double contrast = draw(spec.contrast);
        const double saturation = draw(spec.saturation);
        const double hue = draw(spec.hue);

        const Image coloured = color_jitter(img, brightness, contrast, saturation, hue);

        // Inverse mapping of translate(scale(shear(p))).
        const double t = std::tan(shear);
        const double ax = 0.0, ay = img.height - 1.0;  // scale anchor
        Image out(img.width, img.height, img.channels);
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x) {
                const double qx = ax + (x - tx - ax) / scale;
                const double qy = ay + (y - ty - ay) / scale;
                const double sx = qx - t * (img.height - 1 - qy);
                const double sy = qy;
                if (sx < 0.0 || sx > img.width - 1 || sy < 0.0 || sy > img.height - 1)
                    continue;  // stays black
                for (int c = 0; c < out.channels; ++c)
                    out.at(x, y, c) = sample_bilinear(coloured, sx, sy, c);
            }
        return out;
    };
}

}  // namespace chesscv
