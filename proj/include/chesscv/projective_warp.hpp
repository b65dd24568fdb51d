#pragma once

#include <cmath>

#include "chesscv/geometry.hpp"
#include "chesscv/image.hpp"

namespace chesscv {

/// Mapping between warped board units and pixels of a rendered warped
/// image: pixel (ix, iy) has its centre at units (u0 + (ix+0.5)/px_per_unit,
/// v0 + (iy+0.5)/px_per_unit).
struct WarpFrame {
    double px_per_unit = 50.0;
    double u0 = 0.0;
    double v0 = 0.0;

    double unit_to_px_x(double u) const { return (u - u0) * px_per_unit - 0.5; }
    double unit_to_px_y(double v) const { return (v - v0) * px_per_unit - 0.5; }
    double px_to_unit_x(double px) const { return u0 + (px + 0.5) / px_per_unit; }
    double px_to_unit_y(double py) const { return v0 + (py + 0.5) / px_per_unit; }
};

/// Render the warped view of `src` over the unit rectangle
/// [u0,u1]x[v0,v1], given `h` mapping source pixels to warped units.
/// Inverse mapping with bilinear interpolation; pixels whose preimage
/// falls outside the source are black.
inline Image warp_units(const Image& src, const Homography& h, double u0, double v0, double u1,
                        double v1, double px_per_unit, WarpFrame* frame_out = nullptr) {
    const Homography hinv = h.inverse();
    const int w = std::max(1, static_cast<int>(std::lround((u1 - u0) * px_per_unit)));
    const int hgt = std::max(1, static_cast<int>(std::lround((v1 - v0) * px_per_unit)));
    WarpFrame frame{px_per_unit, u0, v0};
    if (frame_out) *frame_out = frame;

    Image out(w, hgt, src.channels);
    for (int iy = 0; iy < hgt; ++iy) {
        const double v = frame.px_to_unit_y(iy);
        for (int ix = 0; ix < w; ++ix) {
            const double u = frame.px_to_unit_x(ix);
            const auto p = hinv.apply({u, v});
            if (!p) continue;
            if (p->x < -0.5 || p->x > src.width - 0.5 || p->y < -0.5 || p->y > src.height - 0.5)
                continue;
            for (int c = 0; c < src.channels; ++c)
                out.at(ix, iy, c) = sample_bilinear(src, p->x, p->y, c);
        }
    }
    return out;
}

}  // namespace chesscv
