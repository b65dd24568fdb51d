#include <chesscv/board_detect.hpp>
#include <chesscv/chesscv.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>
#include <vector>

using namespace chesscv;

namespace {

// Independent projective map for oracles: plain 3x3 matrix application.
std::array<double, 9> random_h_matrix(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> scale(20.0, 60.0);
    std::uniform_real_distribution<double> off(50.0, 400.0);
    std::uniform_real_distribution<double> skew(-8.0, 8.0);
    std::uniform_real_distribution<double> persp(-4e-4, 4e-4);
    return {scale(rng), skew(rng),  off(rng),  //
            skew(rng),  scale(rng), off(rng),  //
            persp(rng), persp(rng), 1.0};
}

Point apply_matrix(const std::array<double, 9>& m, const Point& p) {
    const double w = m[6] * p.x + m[7] * p.y + m[8];
    return {(m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

Homography to_homography(const std::array<double, 9>& m) {
    Eigen::Matrix3d em;
    em << m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8];
    return Homography::from_matrix(em);
}

bool same_point_set(const std::vector<Point>& a, const std::vector<Point>& b) {
    if (a.size() != b.size()) return false;
    auto key = [](const Point& p) { return std::make_pair(p.x, p.y); };
    std::multiset<std::pair<double, double>> sa, sb;
    for (const auto& p : a) sa.insert(key(p));
    for (const auto& p : b) sb.insert(key(p));
    return sa == sb;
}

PolarLine line(double rho, double theta) { return {rho, theta}; }

// polar line through two image points
PolarLine through_points(const Point& a, const Point& b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len = std::hypot(dx, dy);
    const double nx = -dy / len, ny = dx / len;
    return normalize_line(nx * a.x + ny * a.y, std::atan2(ny, nx));
}

// board grid line families pushed through a unit->pixel matrix
struct GridLines {
    std::vector<PolarLine> horizontal;  // images of y = j
    std::vector<PolarLine> vertical;    // images of x = i
};

GridLines grid_lines(const std::array<double, 9>& m) {
    GridLines g;
    for (int j = 0; j <= 8; ++j)
        g.horizontal.push_back(
            through_points(apply_matrix(m, {0.0, static_cast<double>(j)}),
                           apply_matrix(m, {8.0, static_cast<double>(j)})));
    for (int i = 0; i <= 8; ++i)
        g.vertical.push_back(
            through_points(apply_matrix(m, {static_cast<double>(i), 0.0}),
                           apply_matrix(m, {static_cast<double>(i), 8.0})));
    return g;
}

}  // namespace

TEST(CountInliers, MatchesBruteForceOnRandomInstances) {
    std::mt19937_64 rng(2026);
    std::uniform_int_distribution<int> npts(1, 20);
    std::uniform_real_distribution<double> coord(0.0, 800.0);
    std::uniform_real_distribution<double> gamma_d(0.05, 0.45);
    for (int inst = 0; inst < 50; ++inst) {
        const auto m = random_h_matrix(rng);
        // board-units -> pixels above; inlier counting runs pixels -> units
        const Homography h = to_homography(m).inverse();
        const int n = npts(rng);
        std::vector<Point> pts;
        for (int i = 0; i < n; ++i) {
            if (i % 2 == 0) {
                // exact or near lattice points pushed through the forward map
                std::uniform_int_distribution<int> li(0, 8);
                std::uniform_real_distribution<double> eps(-0.3, 0.3);
                const Point unit{li(rng) + eps(rng), li(rng) + eps(rng)};
                pts.push_back(apply_matrix(m, unit));
            } else {
                pts.push_back({coord(rng), coord(rng)});
            }
        }
        const double gamma = gamma_d(rng);

        // brute-force oracle with an independently written warp + criterion
        std::vector<Point> want;
        for (const auto& p : pts) {
            const double w = h.m(2, 0) * p.x + h.m(2, 1) * p.y + h.m(2, 2);
            if (std::fabs(w) < 1e-12) continue;
            const double ux = (h.m(0, 0) * p.x + h.m(0, 1) * p.y + h.m(0, 2)) / w;
            const double uy = (h.m(1, 0) * p.x + h.m(1, 1) * p.y + h.m(1, 2)) / w;
            const double dx = ux - std::round(ux), dy = uy - std::round(uy);
            if (std::sqrt(dx * dx + dy * dy) < gamma) want.push_back(p);
        }

        const InlierSet got = count_inliers(h, pts, gamma);
        EXPECT_EQ(got.count, static_cast<int>(want.size())) << "instance " << inst;
        EXPECT_EQ(got.count, static_cast<int>(got.inliers.size()));
        EXPECT_TRUE(same_point_set(got.inliers, want)) << "instance " << inst;
    }
}

TEST(CountInliers, BoundaryIsStrict) {
    // identity map; point exactly gamma away from the lattice is an outlier
    const Homography id;
    const double gamma = 0.25;
    EXPECT_EQ(count_inliers(id, {{3.0 + gamma, 4.0}}, gamma).count, 0);
    EXPECT_EQ(count_inliers(id, {{3.0 + gamma - 1e-9, 4.0}}, gamma).count, 1);
    EXPECT_THROW(count_inliers(id, {{0, 0}}, 0.5), std::invalid_argument);
    EXPECT_THROW(count_inliers(id, {{0, 0}}, 0.0), std::invalid_argument);
}

TEST(MeanTheta, HandlesAxialWrapAround) {
    // angles hugging both sides of the 0/pi seam average to the seam
    const double eps = 0.05;
    const double m = mean_theta({line(0, eps), line(0, M_PI - eps)});
    EXPECT_LT(std::min(m, M_PI - m), 1e-9);
    // plain case
    EXPECT_NEAR(mean_theta({line(0, 0.4), line(0, 0.6)}), 0.5, 1e-9);
}

TEST(MeanLine, AlignsMembersBeforeAveragingRho) {
    // the same geometric line expressed on both sides of the seam
    const PolarLine a = {100.0, 0.02};
    const PolarLine b = normalize_line(-100.0, 0.02 + M_PI - 0.04);
    const PolarLine m = mean_line({a, b});
    // the mean must stay near the common geometric line, not cancel to rho=0
    const PolarLine aligned = align_to(m, 0.0);
    EXPECT_NEAR(std::fabs(aligned.rho), 100.0, 1.0);
}

TEST(ClusterByOrientation, SplitsGridLineFamilies) {
    std::vector<PolarLine> lines;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> jitter(-0.02, 0.02);
    for (int i = 0; i < 9; ++i) {
        lines.push_back(line(100.0 + 50.0 * i, 0.03 + jitter(rng)));           // near-vertical
        lines.push_back(line(80.0 + 50.0 * i, M_PI / 2 + 0.05 + jitter(rng)));  // near-horizontal
    }
    std::shuffle(lines.begin(), lines.end(), rng);
    const auto [horizontal, vertical] = cluster_by_orientation(lines);
    ASSERT_EQ(vertical.size(), 9u);
    ASSERT_EQ(horizontal.size(), 9u);
    for (const auto& l : vertical) EXPECT_LT(angle_between(l.theta, 0.03), 0.2);
    for (const auto& l : horizontal)
        EXPECT_LT(angle_between(l.theta, M_PI / 2 + 0.05), 0.2);
}

TEST(ClusterByOrientation, SplitsFamiliesAcrossAxialSeam) {
    std::vector<PolarLine> lines;
    for (int i = 0; i < 5; ++i) {
        lines.push_back(line(100.0 + 40.0 * i, i % 2 ? 0.04 : M_PI - 0.04));  // seam family
        lines.push_back(line(90.0 + 40.0 * i, M_PI / 2 - 0.03));
    }
    const auto [horizontal, vertical] = cluster_by_orientation(lines);
    ASSERT_EQ(vertical.size(), 5u);
    ASSERT_EQ(horizontal.size(), 5u);
    for (const auto& l : vertical) {
        const double d = std::min(l.theta, M_PI - l.theta);
        EXPECT_LT(d, 0.1);
    }
}

TEST(DedupLines, CollapsesNearDuplicatesKeepsDistinct) {
    // near-vertical family measured against a horizontal reference line
    const PolarLine reference = line(200.0, M_PI / 2);  // y = 200
    std::vector<PolarLine> group = {
        line(100.0, 0.00), line(101.5, 0.002), line(99.0, -0.001),  // one cluster
        line(300.0, 0.00),                                          // far away
        line(301.0, 0.001),                                         // same cluster as above
    };
    const auto out = dedup_lines(group, reference, 12.0);
    ASSERT_EQ(out.size(), 2u);
    // first-appearance order: the x~100 cluster, then the x~300 cluster
    EXPECT_NEAR(align_to(out[0], 0.0).rho, 100.0, 3.0);
    EXPECT_NEAR(align_to(out[1], 0.0).rho, 300.0, 3.0);
}

TEST(RansacGrid, RecoversLatticeFromExactIntersections) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        const auto m = random_h_matrix(rng);
        std::vector<Point> pts;
        for (int x = 0; x <= 8; ++x)
            for (int y = 0; y <= 8; ++y)
                pts.push_back(apply_matrix(m, {static_cast<double>(x), static_cast<double>(y)}));
        const GridLines gl = grid_lines(m);
        const GridFit fit = ransac_grid(pts, gl.horizontal, gl.vertical, 0.15, 33);
        EXPECT_EQ(static_cast<int>(fit.inliers.size()), 81) << "trial " << trial;
        // all lattice points warp to near-integers with extent 8 per axis
        int x_min = 1 << 20, x_max = -(1 << 20), y_min = 1 << 20, y_max = -(1 << 20);
        for (const auto& p : fit.inliers) {
            const auto u = fit.h.apply(p);
            ASSERT_TRUE(u.has_value());
            const double rx = std::round(u->x), ry = std::round(u->y);
            EXPECT_NEAR(u->x, rx, 0.05);
            EXPECT_NEAR(u->y, ry, 0.05);
            x_min = std::min(x_min, static_cast<int>(rx));
            x_max = std::max(x_max, static_cast<int>(rx));
            y_min = std::min(y_min, static_cast<int>(ry));
            y_max = std::max(y_max, static_cast<int>(ry));
        }
        EXPECT_EQ(x_max - x_min, 8);
        EXPECT_EQ(y_max - y_min, 8);
    }
}

TEST(RansacGrid, SeparatesLatticeFromOutliers) {
    std::mt19937_64 rng(99);
    const auto m = random_h_matrix(rng);
    std::vector<Point> lattice;
    std::uniform_real_distribution<double> noise(-0.02, 0.02);
    for (int x = 0; x <= 8; ++x)
        for (int y = 0; y <= 8; ++y)
            lattice.push_back(apply_matrix(m, {x + noise(rng), y + noise(rng)}));
    std::vector<Point> pts = lattice;
    std::uniform_real_distribution<double> off(0.3, 0.7);
    std::uniform_int_distribution<int> cell(0, 7);
    std::vector<Point> outliers;
    for (int i = 0; i < 20; ++i) {
        // off-lattice points in board coordinates stay off-lattice in the image
        outliers.push_back(apply_matrix(m, {cell(rng) + off(rng), cell(rng) + off(rng)}));
    }
    pts.insert(pts.end(), outliers.begin(), outliers.end());
    std::shuffle(pts.begin(), pts.end(), rng);

    const GridLines gl = grid_lines(m);
    const GridFit fit = ransac_grid(pts, gl.horizontal, gl.vertical, 0.15, 33);
    EXPECT_EQ(fit.inliers.size(), lattice.size());
    EXPECT_TRUE(same_point_set(fit.inliers, lattice));
}

TEST(RansacGrid, ValidatesInput) {
    const std::vector<PolarLine> two = {line(0, 0), line(10, 0)};
    const std::vector<PolarLine> one = {line(0, M_PI / 2)};
    const std::vector<Point> pts = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    EXPECT_THROW(ransac_grid({{0, 0}, {1, 0}, {0, 1}}, two, two, 0.15, 1), localization_error);
    EXPECT_THROW(ransac_grid(pts, two, one, 0.15, 1), localization_error);
    EXPECT_THROW(ransac_grid(pts, two, two, 0.5, 1), std::invalid_argument);
}

TEST(CompleteGrid, RestoresDroppedOuterBoundaries) {
    // Warp rendered boards with one or two outer boundary lines withheld from
    // the inlier set; completion must grow back to the full 8x8 footprint on
    // the correct side.
    auto fens = sample_positions(12, 777);
    std::mt19937_64 rng(42);
    int ok = 0;
    const int trials = 12;
    for (int i = 0; i < trials; ++i) {
        SynthConfig sc;
        sc.seed = 9000 + i;
        RenderResult r = render(fens[i], sc);
        const Homography h = homography_from_points(r.label.corners, 8.0, 8.0);
        const Image gray = to_grayscale(r.image);

        int x0 = 0, x1 = 8, y0 = 0, y1 = 8;
        std::uniform_int_distribution<int> howmany(1, 2), which(0, 3);
        const int n = howmany(rng);
        std::array<bool, 4> dropped{};
        for (int k = 0; k < n; ++k) {
            const int w = which(rng);
            if (dropped[w]) {
                --k;
                continue;
            }
            dropped[w] = true;
            if (w == 0) x0 = 1;
            if (w == 1) x1 = 7;
            if (w == 2) y0 = 1;
            if (w == 3) y1 = 7;
        }

        std::vector<Point> quantized;
        for (int x = x0; x <= x1; ++x)
            for (int y = y0; y <= y1; ++y)
                quantized.push_back({static_cast<double>(x), static_cast<double>(y)});

        const double margin = (8 - std::min(x1 - x0, y1 - y0)) + 1.5;
        WarpFrame frame;
        const Image warped = warp_units(gray, h, x0 - margin, y0 - margin, x1 + margin,
                                        y1 + margin, 50.0, &frame);
        const WarpedGrid g = complete_grid(warped, quantized, frame);
        if (g.x_min == 0 && g.x_max == 8 && g.y_min == 0 && g.y_max == 8) ++ok;
    }
    EXPECT_EQ(ok, trials);
}

TEST(CompleteGrid, ValidatesInput) {
    Image rgb(32, 32, 3);
    Image gray(32, 32, 1);
    WarpFrame frame;
    EXPECT_THROW(complete_grid(rgb, {{0, 0}}, frame), std::invalid_argument);
    EXPECT_THROW(complete_grid(gray, {}, frame), std::invalid_argument);
    EXPECT_THROW(complete_grid(gray, {{0, 0}}, frame, 0.6), std::invalid_argument);
}

TEST(LocateCorners, FindsRenderedBoardWithinTolerance) {
    auto fens = sample_positions(3, 31);
    for (int i = 0; i < 3; ++i) {
        SynthConfig sc;
        sc.seed = 500 + i;
        const RenderResult r = render(fens[i], sc);
        const BoardLocation loc = locate_corners(r.image);
        const std::array<Point, 4> got = loc.corners.as_array();
        // match detected corners to labelled ones by best assignment
        std::array<int, 4> perm = {0, 1, 2, 3};
        double best = 1e18;
        std::sort(perm.begin(), perm.end());
        do {
            double worst = 0.0;
            for (int k = 0; k < 4; ++k)
                worst = std::max(worst, std::hypot(got[k].x - r.label.corners[perm[k]].x,
                                                   got[k].y - r.label.corners[perm[k]].y));
            best = std::min(best, worst);
        } while (std::next_permutation(perm.begin(), perm.end()));
        EXPECT_LT(best, 0.01 * r.image.width) << "render " << i;

        // the homography sends each detected corner to its lattice corner
        const std::array<Point, 4> lattice = {{{0, 0}, {8, 0}, {8, 8}, {0, 8}}};
        for (int k = 0; k < 4; ++k) {
            const auto u = loc.h.apply(got[k]);
            ASSERT_TRUE(u.has_value());
            EXPECT_NEAR(u->x, lattice[k].x, 1e-6);
            EXPECT_NEAR(u->y, lattice[k].y, 1e-6);
        }
        // corner order is canonical: first corner has the smallest x+y
        for (int k = 1; k < 4; ++k)
            EXPECT_LE(got[0].x + got[0].y, got[k].x + got[k].y + 1e-9);
    }
}

TEST(LocateCorners, ThrowsTaggedErrorsOnHopelessInput) {
    Image blank(200, 200, 1);
    for (double& v : blank.data) v = 0.5;
    try {
        locate_corners(blank);
        FAIL() << "expected localization_error";
    } catch (const localization_error& e) {
        EXPECT_NE(std::string(e.what()).find("board localisation failed"), std::string::npos);
        EXPECT_EQ(e.stage(), LocStage::kEdges);
    }
    Image tiny(8, 8, 1);
    EXPECT_THROW(locate_corners(tiny), localization_error);
}
