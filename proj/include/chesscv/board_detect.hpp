#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "chesscv/canny.hpp"
#include "chesscv/clustering.hpp"
#include "chesscv/geometry.hpp"
#include "chesscv/hough.hpp"
#include "chesscv/image.hpp"
#include "chesscv/projective_warp.hpp"

namespace chesscv {

/// Pipeline stage in which board localisation gave up.
enum class LocStage {
    kEdges,
    kLines,
    kClustering,
    kDedup,
    kIntersections,
    kRansac,
    kCompletion,
    kCorners,
};

inline const char* to_string(LocStage s) {
    switch (s) {
        case LocStage::kEdges: return "edges";
        case LocStage::kLines: return "lines";
        case LocStage::kClustering: return "clustering";
        case LocStage::kDedup: return "dedup";
        case LocStage::kIntersections: return "intersections";
        case LocStage::kRansac: return "ransac";
        case LocStage::kCompletion: return "completion";
        case LocStage::kCorners: return "corners";
    }
    return "unknown";
}

/// Single failure type for every localisation stage, tagged with the stage
/// that raised it.
class localization_error : public std::runtime_error {
  public:
    localization_error(LocStage stage, const std::string& detail)
        : std::runtime_error("board localisation failed at stage '" +
                             std::string(to_string(stage)) + "': " + detail),
          stage_(stage) {}

    LocStage stage() const { return stage_; }

  private:
    LocStage stage_;
};

/// Consensus grid homography. Every inlier warps to within
/// tolerance_gamma of an integer lattice point under h.
struct GridFit {
    Homography h;
    std::vector<Point> inliers;
    double tolerance_gamma = 0.15;
};

/// Integer extent of the detected lattice in warped units; a full board
/// spans exactly 8 in each axis.
struct WarpedGrid {
    int x_min = 0;
    int x_max = 8;
    int y_min = 0;
    int y_max = 8;
};

/// Board corners in input-image pixels, ordered as seen in the image.
struct CornerSet {
    Point tl, tr, br, bl;

    std::array<Point, 4> as_array() const { return {tl, tr, br, bl}; }
};

struct BoardLocConfig {
    int working_long_side = 1200;   // images are shrunk to this before detection
    double canny_low = 0.08;        // hysteresis thresholds, relative to peak gradient
    double canny_high = 0.20;
    double hough_rho_res = 1.0;     // accumulator resolution, px
    double hough_theta_res = M_PI / 360.0;
    double hough_votes_frac = 0.12; // votes_min as a fraction of the shorter working side
    int hough_max_lines = 1500;     // raise the vote threshold until at most this many
    double cluster_min_separation = 0.2;  // rad between the two family mean angles
    double dedup_eps = 12.0;        // DBSCAN radius in working-resolution px
    double ransac_gamma = 0.15;     // lattice-rounding inlier tolerance, warped units
    int ransac_max_samples = 10000;
    std::uint64_t ransac_seed = 33;
    double completion_band = 0.1;   // half-width of the gradient-vote band, warped units
    double completion_px_per_unit = 50.0;
};

/// Circular mean of line angles under the axial (mod pi) topology, via the
/// angle-doubling trick. Result in [0, pi).
inline double mean_theta(const std::vector<PolarLine>& lines) {
    if (lines.empty()) throw std::invalid_argument("mean_theta: empty group");
    double s = 0.0, c = 0.0;
    for (const auto& l : lines) {
        s += std::sin(2.0 * l.theta);
        c += std::cos(2.0 * l.theta);
    }
    double t = 0.5 * std::atan2(s, c);
    if (t < 0.0) t += M_PI;
    return t;
}

/// Average line of a group: circular-mean theta, mean rho after aligning
/// each member to that theta (so wrap-around members do not cancel).
inline PolarLine mean_line(const std::vector<PolarLine>& lines) {
    const double t = mean_theta(lines);
    double rho = 0.0;
    for (const auto& l : lines) rho += align_to(l, t).rho;
    rho /= static_cast<double>(lines.size());
    return normalize_line(rho, t);
}

/// Split detected lines into the two orientation families of the board
/// grid by Ward-linkage agglomeration on the axial angle metric, then
/// label the family whose mean angle is nearer the vertical one.
inline std::pair<std::vector<PolarLine>, std::vector<PolarLine>> cluster_by_orientation(
    const std::vector<PolarLine>& lines, double min_separation = 0.2) {
    const std::size_t n = lines.size();
    if (n < 2)
        throw localization_error(LocStage::kClustering, "need at least 2 lines to split");

    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            dist[i * n + j] = angle_between(lines[i].theta, lines[j].theta);

    const std::vector<int> labels = ward_two_way_split(dist, n);
    std::vector<PolarLine> a, b;
    for (std::size_t i = 0; i < n; ++i)
        (labels[i] == 0 ? a : b).push_back(lines[i]);
    if (a.empty() || b.empty())
        throw localization_error(LocStage::kClustering, "degenerate split");

    const double ta = mean_theta(a), tb = mean_theta(b);
    if (angle_between(ta, tb) < min_separation)
        throw localization_error(LocStage::kClustering,
                                 "all lines share one orientation family");
    // Vertical lines have their normal near theta = 0 (mod pi).
    const bool a_vertical = angle_between(ta, 0.0) <= angle_between(tb, 0.0);
    if (a_vertical) return {std::move(b), std::move(a)};
    return {std::move(a), std::move(b)};
}

/// Collapse near-duplicate lines: DBSCAN (minPts = 1, radius eps) on each
/// line's intersection with `reference`, replacing every cluster by its
/// mean line. Cluster order follows first appearance in `group`.
inline std::vector<PolarLine> dedup_lines(const std::vector<PolarLine>& group,
                                          const PolarLine& reference, double eps) {
    if (group.empty()) return {};
    if (eps <= 0.0) throw std::invalid_argument("dedup_lines: eps must be positive");

    std::vector<Point> hits(group.size());
    for (std::size_t i = 0; i < group.size(); ++i)
        hits[i] = intersect(group[i], reference);  // throws on a parallel reference

    const std::vector<int> labels = dbscan(
        group.size(), eps, 1,
        [&](std::size_t i, std::size_t j) { return distance(hits[i], hits[j]); });

    const int n_clusters = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<PolarLine>> buckets(static_cast<std::size_t>(n_clusters));
    for (std::size_t i = 0; i < group.size(); ++i)
        buckets[static_cast<std::size_t>(labels[i])].push_back(group[i]);

    std::vector<PolarLine> out;
    out.reserve(buckets.size());
    for (const auto& bucket : buckets) out.push_back(mean_line(bucket));
    return out;
}

/// Inliers of a candidate grid homography: points whose warp lands within
/// gamma (strictly) of an integer lattice point.
struct InlierSet {
    int count = 0;
    std::vector<Point> inliers;
};

namespace detail {

struct LatticeSupport {
    int count = 0;
    std::vector<Point> inliers;
    std::vector<Point> targets;  // rounded lattice coordinates, one per inlier
    int x_min = 0, x_max = 0, y_min = 0, y_max = 0;

    bool admissible() const {
        return count > 0 && x_max - x_min <= 8 && y_max - y_min <= 8;
    }
};

/// Shared rounding-criterion scan used by count_inliers and the RANSAC
/// scale loop (which feeds pre-warped coordinates).
template <typename WarpFn>
LatticeSupport collect_support(const std::vector<Point>& pts, double gamma, WarpFn&& warp) {
    LatticeSupport s;
    bool first = true;
    for (const auto& p : pts) {
        Point w;
        if (!warp(p, w)) continue;  // maps to infinity: outlier
        const double rx = std::round(w.x), ry = std::round(w.y);
        if (std::hypot(w.x - rx, w.y - ry) >= gamma) continue;
        const int ix = static_cast<int>(rx), iy = static_cast<int>(ry);
        if (first) {
            s.x_min = s.x_max = ix;
            s.y_min = s.y_max = iy;
            first = false;
        } else {
            s.x_min = std::min(s.x_min, ix);
            s.x_max = std::max(s.x_max, ix);
            s.y_min = std::min(s.y_min, iy);
            s.y_max = std::max(s.y_max, iy);
        }
        s.inliers.push_back(p);
        s.targets.push_back({rx, ry});
        ++s.count;
    }
    return s;
}

inline LatticeSupport collect_support(const Homography& h, const std::vector<Point>& pts,
                                      double gamma) {
    return collect_support(pts, gamma, [&](const Point& p, Point& w) {
        const auto q = h.apply(p);
        if (!q) return false;
        w = *q;
        return true;
    });
}

}  // namespace detail

inline InlierSet count_inliers(const Homography& h, const std::vector<Point>& pts,
                               double gamma) {
    if (!(gamma > 0.0 && gamma < 0.5))
        throw std::invalid_argument("count_inliers: gamma must lie in (0, 0.5)");
    auto s = detail::collect_support(h, pts, gamma);
    return {s.count, std::move(s.inliers)};
}

/// RANSAC grid fit. Each sample draws two distinct horizontal and two
/// distinct vertical lines, maps their four intersections onto a rectangle
/// of every size (sx, sy) in {1..8}^2, and keeps the candidate with the
/// strictly largest inlier count whose rounded lattice footprint stays
/// within 8 units per axis (larger footprints cannot be a chessboard and
/// would otherwise alias the true grid at halved square size). Stops as
/// soon as a candidate explains at least half the intersection points,
/// then refits the homography over all its inliers by least squares.
inline GridFit ransac_grid(const std::vector<Point>& pts,
                           const std::vector<PolarLine>& horizontal,
                           const std::vector<PolarLine>& vertical, double gamma,
                           std::uint64_t seed, int max_samples = 10000) {
    if (!(gamma > 0.0 && gamma < 0.5))
        throw std::invalid_argument("ransac_grid: gamma must lie in (0, 0.5)");
    if (horizontal.size() < 2 || vertical.size() < 2)
        throw localization_error(LocStage::kRansac,
                                 "need at least 2 lines per orientation family");
    if (pts.size() < 4)
        throw localization_error(LocStage::kRansac, "need at least 4 intersection points");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> draw_h(0, horizontal.size() - 1);
    std::uniform_int_distribution<std::size_t> draw_v(0, vertical.size() - 1);
    const int majority = static_cast<int>((pts.size() + 1) / 2);

    int best_count = 0;
    Homography best_h;
    detail::LatticeSupport best_support;
    bool have_best = false;

    for (int sample = 0; sample < max_samples && best_count < majority; ++sample) {
        const std::size_t h0 = draw_h(rng), h1 = draw_h(rng);
        const std::size_t v0 = draw_v(rng), v1 = draw_v(rng);
        if (h0 == h1 || v0 == v1) continue;

        Point p00, p01, p10, p11;  // p<h><v>
        try {
            p00 = intersect(horizontal[h0], vertical[v0]);
            p01 = intersect(horizontal[h0], vertical[v1]);
            p10 = intersect(horizontal[h1], vertical[v0]);
            p11 = intersect(horizontal[h1], vertical[v1]);
        } catch (const std::invalid_argument&) {
            continue;
        }

        // Orient the quad: the horizontal line with the smaller mean y is
        // the top edge, the vertical with the smaller mean x the left one.
        const bool h0_top = p00.y + p01.y <= p10.y + p11.y;
        const bool v0_left = p00.x + p10.x <= p01.x + p11.x;
        const Point tl = h0_top ? (v0_left ? p00 : p01) : (v0_left ? p10 : p11);
        const Point tr = h0_top ? (v0_left ? p01 : p00) : (v0_left ? p11 : p10);
        const Point br = h0_top ? (v0_left ? p11 : p10) : (v0_left ? p01 : p00);
        const Point bl = h0_top ? (v0_left ? p10 : p11) : (v0_left ? p00 : p01);

        const std::array<Point, 4> quad = {tl, tr, br, bl};
        bool degenerate = false;
        for (int i = 0; i < 4 && !degenerate; ++i)
            for (int j = i + 1; j < 4; ++j)
                if (distance(quad[i], quad[j]) < 1e-6) {
                    degenerate = true;
                    break;
                }
        if (degenerate) continue;

        Homography unit;
        try {
            unit = homography_from_points(quad, 1.0, 1.0);
        } catch (const std::invalid_argument&) {
            continue;
        }

        // Pre-warp all points once; scaling by diag(sx, sy, 1) acts
        // directly on the inhomogeneous coordinates.
        std::vector<Point> unit_warp(pts.size());
        std::vector<char> finite(pts.size(), 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto w = unit.apply(pts[i]);
            if (!w) continue;
            unit_warp[i] = *w;
            finite[i] = 1;
        }

        for (int sy = 1; sy <= 8; ++sy) {
            for (int sx = 1; sx <= 8; ++sx) {
                std::size_t idx = 0;
                auto support = detail::collect_support(
                    pts, gamma, [&](const Point&, Point& w) {
                        const std::size_t i = idx++;
                        if (!finite[i]) return false;
                        w = {unit_warp[i].x * sx, unit_warp[i].y * sy};
                        return true;
                    });
                if (!support.admissible() || support.count <= best_count) continue;

                Eigen::Matrix3d scale = Eigen::Matrix3d::Identity();
                scale(0, 0) = sx;
                scale(1, 1) = sy;
                best_h = Homography::from_matrix(scale * unit.m);
                best_count = support.count;
                best_support = std::move(support);
                have_best = true;
            }
        }
    }

    if (!have_best || best_count < majority)
        throw localization_error(LocStage::kRansac,
                                 "no consensus grid within the sample budget");

    // Least-squares refit over all inliers against their lattice targets;
    // keep it only if it still explains a valid majority.
    const Homography refined =
        refine_homography(best_support.inliers, best_support.targets, best_h);
    auto re = detail::collect_support(refined, pts, gamma);
    if (re.admissible() && re.count >= std::max(best_count, majority))
        return {refined, std::move(re.inliers), gamma};
    return {best_h, std::move(best_support.inliers), gamma};
}

/// Grow a partially detected lattice to the full 8x8 board. For each axis
/// with extent below 8, candidate boundary lines one unit outside either
/// end are scored by summing edge pixels (Canny of the axis-aligned Sobel
/// gradient of the warped image) in a narrow band around the candidate,
/// restricted to the known extent of the other axis; the side with the
/// larger sum wins (ties grow the max side). The x axis is completed
/// first, then y sums use the final x range.
inline WarpedGrid complete_grid(const Image& warped_gray,
                                const std::vector<Point>& warped_inliers,
                                const WarpFrame& frame, double band = 0.1,
                                double canny_low = 0.08, double canny_high = 0.20) {
    if (warped_gray.channels != 1)
        throw std::invalid_argument("complete_grid: expects a grayscale warped image");
    if (warped_inliers.empty())
        throw std::invalid_argument("complete_grid: no warped inliers");
    if (!(band > 0.0 && band < 0.5))
        throw std::invalid_argument("complete_grid: band must lie in (0, 0.5)");

    WarpedGrid g;
    g.x_min = g.x_max = static_cast<int>(std::lround(warped_inliers[0].x));
    g.y_min = g.y_max = static_cast<int>(std::lround(warped_inliers[0].y));
    for (const auto& p : warped_inliers) {
        const int x = static_cast<int>(std::lround(p.x));
        const int y = static_cast<int>(std::lround(p.y));
        g.x_min = std::min(g.x_min, x);
        g.x_max = std::max(g.x_max, x);
        g.y_min = std::min(g.y_min, y);
        g.y_max = std::max(g.y_max, y);
    }
    if (g.x_max - g.x_min > 8 || g.y_max - g.y_min > 8)
        throw localization_error(LocStage::kCompletion,
                                 "lattice extent exceeds a chessboard");
    if (g.x_max - g.x_min == 8 && g.y_max - g.y_min == 8) return g;

    // Edge pixels of vertical lines show up in the horizontal gradient and
    // vice versa.
    const EdgeMap ex = canny(sobel_x(warped_gray), canny_low, canny_high);
    const EdgeMap ey = canny(sobel_y(warped_gray), canny_low, canny_high);

    const auto band_sum = [&](const EdgeMap& edges, bool vertical_line, double at,
                              double span_lo, double span_hi) {
        const double a_lo = vertical_line ? frame.unit_to_px_x(at - band)
                                          : frame.unit_to_px_y(at - band);
        const double a_hi = vertical_line ? frame.unit_to_px_x(at + band)
                                          : frame.unit_to_px_y(at + band);
        const double b_lo = vertical_line ? frame.unit_to_px_y(span_lo)
                                          : frame.unit_to_px_x(span_lo);
        const double b_hi = vertical_line ? frame.unit_to_px_y(span_hi)
                                          : frame.unit_to_px_x(span_hi);
        const int alo = std::max(0, static_cast<int>(std::ceil(a_lo)));
        const int blo = std::max(0, static_cast<int>(std::ceil(b_lo)));
        const int ahi = std::min(vertical_line ? edges.width - 1 : edges.height - 1,
                                 static_cast<int>(std::floor(a_hi)));
        const int bhi = std::min(vertical_line ? edges.height - 1 : edges.width - 1,
                                 static_cast<int>(std::floor(b_hi)));
        long total = 0;
        for (int a = alo; a <= ahi; ++a)
            for (int b = blo; b <= bhi; ++b)
                total += vertical_line ? edges.at(a, b) : edges.at(b, a);
        return total;
    };

    while (g.x_max - g.x_min < 8) {
        const long lo = band_sum(ex, true, g.x_min - 1.0, g.y_min, g.y_max);
        const long hi = band_sum(ex, true, g.x_max + 1.0, g.y_min, g.y_max);
        if (lo > hi)
            --g.x_min;
        else
            ++g.x_max;
    }
    while (g.y_max - g.y_min < 8) {
        const long lo = band_sum(ey, false, g.y_min - 1.0, g.x_min, g.x_max);
        const long hi = band_sum(ey, false, g.y_max + 1.0, g.x_min, g.x_max);
        if (lo > hi)
            --g.y_min;
        else
            ++g.y_max;
    }
    return g;
}

/// Detected board: corner pixels plus the homography taking input-image
/// pixels onto board units [0,8]^2 (top-left corner at the origin, x
/// rightward, y downward, as seen in the image).
struct BoardLocation {
    CornerSet corners;
    Homography h;
};

namespace detail {

/// Indices ordering four quad corners as (top-left, top-right,
/// bottom-right, bottom-left) as seen in the image: sort by angle about
/// the centroid, then rotate the cycle so the min-(x+y) corner leads.
inline std::array<int, 4> order_quad(const std::array<Point, 4>& p) {
    Point c{0.0, 0.0};
    for (const auto& q : p) {
        c.x += q.x / 4.0;
        c.y += q.y / 4.0;
    }
    std::array<int, 4> idx = {0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return std::atan2(p[a].y - c.y, p[a].x - c.x) <
               std::atan2(p[b].y - c.y, p[b].x - c.x);
    });
    int lead = 0;
    for (int i = 1; i < 4; ++i)
        if (p[idx[i]].x + p[idx[i]].y < p[idx[lead]].x + p[idx[lead]].y) lead = i;
    std::rotate(idx.begin(), idx.begin() + lead, idx.end());
    return idx;
}

inline bool is_convex(const std::array<Point, 4>& q) {
    double sign = 0.0;
    for (int i = 0; i < 4; ++i) {
        const Point& a = q[i];
        const Point& b = q[(i + 1) % 4];
        const Point& c = q[(i + 2) % 4];
        const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
        if (std::fabs(cross) < 1e-12) return false;
        if (sign == 0.0)
            sign = cross;
        else if (sign * cross < 0.0)
            return false;
    }
    return true;
}

}  // namespace detail

/// Full localisation chain: shrink, edges, lines, orientation split,
/// dedup, intersections, RANSAC grid fit, grid completion, and corner
/// extraction. Returns corners in original-image pixels and the
/// homography from original pixels to board units.
inline BoardLocation locate_corners(const Image& img, const BoardLocConfig& cfg = {}) {
    if (img.width < 16 || img.height < 16)
        throw localization_error(LocStage::kEdges, "image too small");

    double down = 1.0;
    const Image gray = to_grayscale(shrink_to_long_side(img, cfg.working_long_side, &down));

    const EdgeMap edges = canny(gray, cfg.canny_low, cfg.canny_high);
    if (edges.edge_count() == 0)
        throw localization_error(LocStage::kEdges, "no edges detected");

    double votes = std::max(2.0, cfg.hough_votes_frac * std::min(gray.width, gray.height));
    std::vector<PolarLine> lines = hough_lines(edges, cfg.hough_rho_res, cfg.hough_theta_res,
                                               static_cast<int>(std::lround(votes)));
    while (static_cast<int>(lines.size()) > cfg.hough_max_lines) {
        votes *= 1.3;
        lines = hough_lines(edges, cfg.hough_rho_res, cfg.hough_theta_res,
                            static_cast<int>(std::lround(votes)));
    }
    if (lines.size() < 2)
        throw localization_error(LocStage::kLines, "too few candidate lines");

    auto [hor, ver] = cluster_by_orientation(lines, cfg.cluster_min_separation);

    std::vector<PolarLine> hs, vs;
    try {
        hs = dedup_lines(hor, mean_line(ver), cfg.dedup_eps);
        vs = dedup_lines(ver, mean_line(hor), cfg.dedup_eps);
    } catch (const std::invalid_argument& e) {
        throw localization_error(LocStage::kDedup, e.what());
    }

    std::vector<Point> pts;
    const double mx = 0.25 * gray.width, my = 0.25 * gray.height;
    for (const auto& h : hs)
        for (const auto& v : vs) {
            Point p;
            try {
                p = intersect(h, v);
            } catch (const std::invalid_argument&) {
                continue;
            }
            if (p.x >= -mx && p.x <= gray.width + mx && p.y >= -my && p.y <= gray.height + my)
                pts.push_back(p);
        }
    if (hs.size() < 2 || vs.size() < 2 || pts.size() < 4)
        throw localization_error(LocStage::kIntersections,
                                 "too few line intersections inside the frame");

    const GridFit fit =
        ransac_grid(pts, hs, vs, cfg.ransac_gamma, cfg.ransac_seed, cfg.ransac_max_samples);

    std::vector<Point> quantized;
    quantized.reserve(fit.inliers.size());
    for (const auto& p : fit.inliers) {
        const auto w = fit.h.apply(p);
        if (!w) continue;
        quantized.push_back({std::round(w->x), std::round(w->y)});
    }
    if (quantized.empty())
        throw localization_error(LocStage::kCompletion, "no usable inliers");

    WarpedGrid grid;
    {
        int x0 = static_cast<int>(quantized[0].x), x1 = x0;
        int y0 = static_cast<int>(quantized[0].y), y1 = y0;
        for (const auto& q : quantized) {
            x0 = std::min(x0, static_cast<int>(q.x));
            x1 = std::max(x1, static_cast<int>(q.x));
            y0 = std::min(y0, static_cast<int>(q.y));
            y1 = std::max(y1, static_cast<int>(q.y));
        }
        if (x1 - x0 == 8 && y1 - y0 == 8) {
            grid = {x0, x1, y0, y1};
        } else {
            const double margin = (8 - std::min(x1 - x0, y1 - y0)) + 1.5;
            WarpFrame frame;
            const Image warped =
                warp_units(gray, fit.h, x0 - margin, y0 - margin, x1 + margin, y1 + margin,
                           cfg.completion_px_per_unit, &frame);
            grid = complete_grid(warped, quantized, frame, cfg.completion_band, cfg.canny_low,
                                 cfg.canny_high);
        }
    }

    // Canonical orientation: compose a lattice-to-lattice map so the final
    // homography sends the image's top-left board corner to (0,0), the
    // top-right to (8,0), and so on.
    const std::array<Point, 4> lattice = {
        Point{static_cast<double>(grid.x_min), static_cast<double>(grid.y_min)},
        Point{static_cast<double>(grid.x_max), static_cast<double>(grid.y_min)},
        Point{static_cast<double>(grid.x_max), static_cast<double>(grid.y_max)},
        Point{static_cast<double>(grid.x_min), static_cast<double>(grid.y_max)}};
    const Homography hinv = fit.h.inverse();
    std::array<Point, 4> corner_px;
    for (int i = 0; i < 4; ++i) {
        const auto p = hinv.apply(lattice[i]);
        if (!p) throw localization_error(LocStage::kCorners, "corner at infinity");
        corner_px[i] = *p;
    }
    const std::array<int, 4> order = detail::order_quad(corner_px);
    const std::array<Point, 4> ordered = {corner_px[order[0]], corner_px[order[1]],
                                          corner_px[order[2]], corner_px[order[3]]};
    if (!detail::is_convex(ordered))
        throw localization_error(LocStage::kCorners, "corners are not convex");

    Homography canon;
    try {
        const std::vector<Point> src = {lattice[order[0]], lattice[order[1]],
                                        lattice[order[2]], lattice[order[3]]};
        const std::vector<Point> dst = {{0, 0}, {8, 0}, {8, 8}, {0, 8}};
        canon = Homography::from_matrix(homography_dlt(src, dst).m * fit.h.m);
    } catch (const std::invalid_argument& e) {
        throw localization_error(LocStage::kCorners, e.what());
    }

    // Fold the working-resolution shrink into the final map so it acts on
    // original-image pixels.
    Eigen::Matrix3d shrink = Eigen::Matrix3d::Identity();
    shrink(0, 0) = down;
    shrink(1, 1) = down;
    const Homography h_full = Homography::from_matrix(canon.m * shrink);

    CornerSet corners{{ordered[0].x / down, ordered[0].y / down},
                      {ordered[1].x / down, ordered[1].y / down},
                      {ordered[2].x / down, ordered[2].y / down},
                      {ordered[3].x / down, ordered[3].y / down}};
    return {corners, h_full};
}

}  // namespace chesscv
