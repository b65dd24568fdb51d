#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "chesscv/hough.hpp"

namespace chesscv {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Invertible 3x3 projective map, normalised to unit Frobenius norm with a
/// deterministic sign (largest-magnitude entry positive).
struct Homography {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

    static Homography from_matrix(const Eigen::Matrix3d& raw) {
        const double n = raw.norm();
        if (!(n > 0.0) || !raw.allFinite())
            throw std::invalid_argument("Homography: non-finite matrix");
        Eigen::Matrix3d h = raw / n;
        if (std::fabs(h.determinant()) <= 1e-12)
            throw std::invalid_argument("Homography: singular matrix");
        int ri = 0, ci = 0;
        h.cwiseAbs().maxCoeff(&ri, &ci);
        if (h(ri, ci) < 0.0) h = -h;
        Homography out;
        out.m = h;
        return out;
    }

    Homography inverse() const { return from_matrix(m.inverse().eval()); }

    /// Warp a point; nullopt when it maps to infinity (|w| ~ 0).
    std::optional<Point> apply(const Point& p) const {
        const Eigen::Vector3d v = m * Eigen::Vector3d(p.x, p.y, 1.0);
        if (std::fabs(v.z()) < 1e-12) return std::nullopt;
        return Point{v.x() / v.z(), v.y() / v.z()};
    }
};

/// Intersection of two polar lines; throws when nearly parallel.
inline Point intersect(const PolarLine& a, const PolarLine& b) {
    const double det = std::sin(b.theta - a.theta);  // = cos(a)sin(b) - sin(a)cos(b)
    if (std::fabs(det) <= 1e-9)
        throw std::invalid_argument("intersect: lines are parallel");
    const double x = (a.rho * std::sin(b.theta) - b.rho * std::sin(a.theta)) / det;
    const double y = (b.rho * std::cos(a.theta) - a.rho * std::cos(b.theta)) / det;
    return {x, y};
}

namespace detail {

/// Hartley-style normalisation: translate centroid to origin, scale mean
/// distance to sqrt(2).
inline Eigen::Matrix3d normalizing_transform(const std::vector<Point>& pts) {
    double cx = 0, cy = 0;
    for (const auto& p : pts) {
        cx += p.x;
        cy += p.y;
    }
    cx /= pts.size();
    cy /= pts.size();
    double mean_d = 0;
    for (const auto& p : pts) mean_d += std::hypot(p.x - cx, p.y - cy);
    mean_d /= pts.size();
    const double s = mean_d > 1e-12 ? std::sqrt(2.0) / mean_d : 1.0;
    Eigen::Matrix3d t;
    t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
    return t;
}

}  // namespace detail

/// Direct linear transform over point correspondences (least-squares for
/// more than four). Throws on degenerate configurations.
inline Homography homography_dlt(const std::vector<Point>& src, const std::vector<Point>& dst) {
    if (src.size() != dst.size() || src.size() < 4)
        throw std::invalid_argument("homography_dlt: need >= 4 correspondences");
    const Eigen::Matrix3d ts = detail::normalizing_transform(src);
    const Eigen::Matrix3d td = detail::normalizing_transform(dst);

    const auto n = src.size();
    Eigen::MatrixXd a(2 * n, 9);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d s = ts * Eigen::Vector3d(src[i].x, src[i].y, 1.0);
        const Eigen::Vector3d d = td * Eigen::Vector3d(dst[i].x, dst[i].y, 1.0);
        const double x = s.x(), y = s.y(), u = d.x(), v = d.y();
        a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
        a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const Eigen::VectorXd h = svd.matrixV().col(8);
    Eigen::Matrix3d hm;
    hm << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    const Eigen::Matrix3d denorm = td.inverse() * hm * ts;
    if (!denorm.allFinite() || std::fabs(denorm.determinant()) <= 1e-15)
        throw std::invalid_argument("homography_dlt: degenerate configuration");
    return Homography::from_matrix(denorm);
}

/// Homography sending four source points onto the axis-aligned rectangle
/// (0,0),(sx,0),(sx,sy),(0,sy), in that corner order.
inline Homography homography_from_points(const std::array<Point, 4>& src, double sx, double sy) {
    const std::vector<Point> s(src.begin(), src.end());
    const std::vector<Point> d = {{0, 0}, {sx, 0}, {sx, sy}, {0, sy}};
    return homography_dlt(s, d);
}

/// Total squared Euclidean distance between warped sources and targets.
/// Points mapping to infinity contribute a large finite penalty.
inline double transfer_residual(const Homography& h, const std::vector<Point>& src,
                                const std::vector<Point>& dst) {
    double total = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
        const auto w = h.apply(src[i]);
        if (!w) {
            total += 1e18;
            continue;
        }
        const double dx = w->x - dst[i].x, dy = w->y - dst[i].y;
        total += dx * dx + dy * dy;
    }
    return total;
}

/// Least-squares refinement of a homography against fixed targets:
/// normalised DLT followed by damped Gauss-Newton on the geometric
/// residual, keeping the best iterate seen (never worse than `init`).
inline Homography refine_homography(const std::vector<Point>& src, const std::vector<Point>& dst,
                                    const Homography& init) {
    Homography best = init;
    double best_r = transfer_residual(init, src, dst);
    try {
        const Homography h = homography_dlt(src, dst);
        const double r = transfer_residual(h, src, dst);
        if (r < best_r) {
            best = h;
            best_r = r;
        }
    } catch (const std::invalid_argument&) {
        // keep init
    }

    Eigen::Matrix<double, 9, 1> p;
    p << best.m(0, 0), best.m(0, 1), best.m(0, 2), best.m(1, 0), best.m(1, 1), best.m(1, 2),
        best.m(2, 0), best.m(2, 1), best.m(2, 2);
    double lambda = 1e-6;
    for (int iter = 0; iter < 12; ++iter) {
        Eigen::Matrix<double, 9, 9> jtj = Eigen::Matrix<double, 9, 9>::Zero();
        Eigen::Matrix<double, 9, 1> jtr = Eigen::Matrix<double, 9, 1>::Zero();
        for (std::size_t i = 0; i < src.size(); ++i) {
            const double x = src[i].x, y = src[i].y;
            const double wn = p(6) * x + p(7) * y + p(8);
            if (std::fabs(wn) < 1e-12) continue;
            const double un = p(0) * x + p(1) * y + p(2);
            const double vn = p(3) * x + p(4) * y + p(5);
            const double u = un / wn, v = vn / wn;
            Eigen::Matrix<double, 2, 9> j = Eigen::Matrix<double, 2, 9>::Zero();
            j(0, 0) = x / wn; j(0, 1) = y / wn; j(0, 2) = 1.0 / wn;
            j(0, 6) = -u * x / wn; j(0, 7) = -u * y / wn; j(0, 8) = -u / wn;
            j(1, 3) = x / wn; j(1, 4) = y / wn; j(1, 5) = 1.0 / wn;
            j(1, 6) = -v * x / wn; j(1, 7) = -v * y / wn; j(1, 8) = -v / wn;
            const Eigen::Vector2d r(u - dst[i].x, v - dst[i].y);
            jtj += j.transpose() * j;
            jtr += j.transpose() * r;
        }
        const Eigen::Matrix<double, 9, 1> step =
            (jtj + lambda * Eigen::Matrix<double, 9, 9>::Identity()).ldlt().solve(jtr);
        const Eigen::Matrix<double, 9, 1> cand = p - step;
        Eigen::Matrix3d cm;
        cm << cand(0), cand(1), cand(2), cand(3), cand(4), cand(5), cand(6), cand(7), cand(8);
        if (!cm.allFinite()) break;
        Homography ch;
        try {
            ch = Homography::from_matrix(cm);
        } catch (const std::invalid_argument&) {
            break;
        }
        const double cr = transfer_residual(ch, src, dst);
        if (cr < best_r) {
            best = ch;
            best_r = cr;
            p = cand / cm.norm();
            lambda = std::max(lambda * 0.5, 1e-9);
        } else {
            lambda *= 10.0;
            if (lambda > 1e3) break;
        }
    }
    return best;
}

}  // namespace chesscv
