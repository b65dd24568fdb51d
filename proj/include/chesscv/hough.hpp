#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "chesscv/canny.hpp"

namespace chesscv {

/// Line in polar form: x*cos(theta) + y*sin(theta) = rho, with theta
/// normalised to [0, pi) and the sign of rho absorbing direction.
struct PolarLine {
    double rho = 0.0;
    double theta = 0.0;
};

/// Canonicalise (rho, theta) so theta lands in [0, pi).
inline PolarLine normalize_line(double rho, double theta) {
    while (theta < 0.0) {
        theta += M_PI;
        rho = -rho;
    }
    while (theta >= M_PI) {
        theta -= M_PI;
        rho = -rho;
    }
    return {rho, theta};
}

/// Smallest angle between two undirected lines (axial metric, <= pi/2).
inline double angle_between(double a, double b) {
    double d = std::fabs(a - b);
    d = std::fmod(d, M_PI);
    return std::min(d, M_PI - d);
}

/// Re-express `line` so its theta sits within pi/2 of `reference_theta`
/// (flipping rho's sign when crossing the axial wrap). Needed before
/// averaging nearly-identical lines whose thetas straddle 0/pi.
inline PolarLine align_to(const PolarLine& line, double reference_theta) {
    double t = line.theta, r = line.rho;
    if (std::fabs(t - reference_theta) > M_PI / 2) {
        t += (t < reference_theta) ? M_PI : -M_PI;
        r = -r;
    }
    return {r, t};
}

/// Standard rho-theta Hough transform over a binary edge map. Returns
/// every accumulator cell reaching `votes_min`; near-duplicate lines from
/// adjacent cells are expected and deduplicated downstream.
inline std::vector<PolarLine> hough_lines(const EdgeMap& edges, double rho_res,
                                          double theta_res, int votes_min) {
    if (rho_res <= 0.0 || theta_res <= 0.0)
        throw std::invalid_argument("hough_lines: resolutions must be positive");
    std::vector<PolarLine> out;
    if (edges.width == 0 || edges.height == 0) return out;

    const int n_theta = std::max(1, static_cast<int>(std::lround(M_PI / theta_res)));
    const double diag = std::hypot(edges.width, edges.height);
    const int n_rho = 2 * static_cast<int>(std::ceil(diag / rho_res)) + 1;
    const int rho_mid = n_rho / 2;

    std::vector<double> sin_t(n_theta), cos_t(n_theta);
    for (int t = 0; t < n_theta; ++t) {
        sin_t[t] = std::sin(t * theta_res);
        cos_t[t] = std::cos(t * theta_res);
    }

    std::vector<int> accum(static_cast<std::size_t>(n_theta) * n_rho, 0);
    for (int y = 0; y < edges.height; ++y)
        for (int x = 0; x < edges.width; ++x) {
            if (!edges.at(x, y)) continue;
            for (int t = 0; t < n_theta; ++t) {
                const double rho = x * cos_t[t] + y * sin_t[t];
                const int r = static_cast<int>(std::lround(rho / rho_res)) + rho_mid;
                ++accum[static_cast<std::size_t>(t) * n_rho + r];
            }
        }

    for (int t = 0; t < n_theta; ++t)
        for (int r = 0; r < n_rho; ++r)
            if (accum[static_cast<std::size_t>(t) * n_rho + r] >= votes_min)
                out.push_back(normalize_line((r - rho_mid) * rho_res, t * theta_res));
    return out;
}

}  // namespace chesscv
