#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chesscv/chess.hpp"
#include "chesscv/geometry.hpp"
#include "chesscv/image.hpp"
#include "chesscv/labels.hpp"

namespace chesscv {

using Rgb = std::array<double, 3>;

/// Flat colour scheme of a rendered set. Style 1 deliberately swaps the
/// piece side colours and changes the board palette so that classifiers
/// trained on style 0 fail on it until fine-tuned.
struct SynthPalette {
    Rgb light, dark, table;
    Rgb white_fill, white_outline;
    Rgb black_fill, black_outline;
};

/// Per-style glyph geometry multipliers (style 1 reshapes the pieces).
struct GlyphStyle {
    double stem_w = 1.0;
    double stem_h = 1.0;
    double head_r = 1.0;
    double outline_w = 0.035;  // board units
};

inline SynthPalette palette_for_style(int style) {
    if (style == 0)
        return {{0.82, 0.78, 0.68}, {0.45, 0.33, 0.25}, {0.16, 0.18, 0.22},
                {0.92, 0.91, 0.88}, {0.20, 0.20, 0.20},
                {0.15, 0.14, 0.16}, {0.85, 0.85, 0.85}};
    if (style == 1)
        return {{0.72, 0.76, 0.80}, {0.28, 0.38, 0.33}, {0.55, 0.45, 0.28},
                {0.22, 0.25, 0.45}, {0.90, 0.90, 0.95},
                {0.88, 0.80, 0.60}, {0.25, 0.20, 0.10}};
    throw std::invalid_argument("palette_for_style: unknown style");
}

inline GlyphStyle glyph_style_for(int style) {
    if (style == 0) return {1.0, 1.0, 1.0, 0.035};
    if (style == 1) return {1.4, 0.92, 0.85, 0.05};
    throw std::invalid_argument("glyph_style_for: unknown style");
}

struct SynthConfig {
    int square_px = 50;        // canvas resolution per board unit
    int out_width = 800;
    int out_height = 600;
    int style = 0;
    Perspective perspective = Perspective::kWhite;
    std::uint64_t seed = 0;
    double noise_sigma = 0.0;      // additive Gaussian noise, sigma in [0, 0.1]
    double line_jitter_px = 0.0;   // jitter of internal square boundaries
    double elev_min_deg = 45.0;    // camera elevation range
    double elev_max_deg = 60.0;
    double azimuth_range_deg = 30.0;
    double roll_range_deg = 8.0;
    double fit_min = 0.55;         // board's share of the shorter image side
    double fit_max = 0.80;
    std::optional<Homography> fixed_h;  // board units -> image pixels, overrides camera draw
};

namespace detail {

/// Piece silhouettes: a vertical stem plus a head whose shape encodes the
/// kind; all extents in board units. Height grows with the kind so the
/// king is tallest (and overflows into the cell behind it).
struct GlyphGeom {
    double stem_w, stem_h, head_r;
};

inline GlyphGeom glyph_geom(int kind, const GlyphStyle& gs) {
    static constexpr GlyphGeom base[6] = {
        {0.14, 0.32, 0.15},  // pawn
        {0.16, 0.40, 0.20},  // knight
        {0.14, 0.52, 0.17},  // bishop
        {0.26, 0.52, 0.21},  // rook
        {0.16, 0.72, 0.18},  // queen
        {0.16, 0.90, 0.17},  // king
    };
    const GlyphGeom& g = base[kind];
    return {g.stem_w * gs.stem_w, g.stem_h * gs.stem_h, g.head_r * gs.head_r};
}

/// Hit test in glyph-local coordinates: px right of the stem axis, py
/// height above the base; `inflate` grows every primitive (outline pass).
inline bool glyph_hit(int kind, const GlyphGeom& g, double px, double py, double inflate) {
    // stem
    if (std::fabs(px) <= g.stem_w / 2 + inflate && py >= -inflate &&
        py <= g.stem_h + inflate)
        return true;
    const double r = g.head_r + inflate;
    const double dy = py - (g.stem_h + g.head_r);  // head centre
    switch (kind) {
        case 0:  // pawn: disc
            return px * px + dy * dy <= r * r;
        case 1:  // knight: rightward wedge
            return px >= -r && px <= r && std::fabs(dy) <= (r - px) / 2;
        case 2:  // bishop: diamond
            return std::fabs(px) + std::fabs(dy) <= r;
        case 3:  // rook: wide battlement bar
            return std::fabs(px) <= r && std::fabs(dy) <= r * 0.45;
        case 4: {  // queen: disc plus a small crown diamond above
            if (px * px + dy * dy <= r * r) return true;
            const double cy = py - (g.stem_h + 2 * g.head_r + 0.08);
            return std::fabs(px) + std::fabs(cy) <= g.head_r * 0.55 + inflate;
        }
        case 5:  // king: cross
            return (std::fabs(px) <= r && std::fabs(dy) <= r * 0.32) ||
                   (std::fabs(px) <= r * 0.32 && std::fabs(dy) <= r);
    }
    return false;
}

inline double glyph_total_height(int kind, const GlyphGeom& g) {
    double h = g.stem_h + 2 * g.head_r;
    if (kind == 4) h += g.head_r * 0.55 + 0.08;  // queen crown
    return h;
}

inline void paint_glyph(Image& canvas, int sp, double uc, double vbase, int kind,
                        const GlyphStyle& gs, const Rgb& fill, const Rgb& outline) {
    const GlyphGeom g = glyph_geom(kind, gs);
    const double ow = gs.outline_w;
    const double half_w = std::max(g.stem_w / 2, g.head_r) + ow + 0.05;
    const double total_h = glyph_total_height(kind, g) + ow;

    const auto to_px = [&](double unit) { return (unit + 1.0) * sp; };
    const int x0 = std::max(0, static_cast<int>(std::floor(to_px(uc - half_w))));
    const int x1 = std::min(canvas.width - 1, static_cast<int>(std::ceil(to_px(uc + half_w))));
    const int y0 = std::max(0, static_cast<int>(std::floor(to_px(vbase - total_h))));
    const int y1 = std::min(canvas.height - 1, static_cast<int>(std::ceil(to_px(vbase + ow))));

    for (int y = y0; y <= y1; ++y) {
        const double v = (y + 0.5) / sp - 1.0;
        const double py = vbase - v;
        for (int x = x0; x <= x1; ++x) {
            const double u = (x + 0.5) / sp - 1.0;
            const double px = u - uc;
            if (glyph_hit(kind, g, px, py, 0.0)) {
                for (int c = 0; c < 3; ++c) canvas.at(x, y, c) = fill[c];
            } else if (glyph_hit(kind, g, px, py, ow)) {
                for (int c = 0; c < 3; ++c) canvas.at(x, y, c) = outline[c];
            }
        }
    }
}

/// Rectified scene: the board plus a one-unit table margin, at sp px per
/// unit, with pieces painted far-to-near so near pieces occlude far ones.
inline Image make_canvas(const Position& pos, const SynthConfig& cfg,
                         const std::array<double, 9>& bx, const std::array<double, 9>& by) {
    const int sp = cfg.square_px;
    const SynthPalette pal = palette_for_style(cfg.style);
    const GlyphStyle gs = glyph_style_for(cfg.style);
    Image canvas(10 * sp, 10 * sp, 3);

    for (int y = 0; y < canvas.height; ++y) {
        const double v = (y + 0.5) / sp - 1.0;
        for (int x = 0; x < canvas.width; ++x) {
            const double u = (x + 0.5) / sp - 1.0;
            const Rgb* colour = &pal.table;
            if (u >= bx[0] && u <= bx[8] && v >= by[0] && v <= by[8]) {
                int i = 7, j = 7;
                while (i > 0 && u < bx[i]) --i;
                while (j > 0 && v < by[j]) --j;
                colour = ((i + j) % 2 == 0) ? &pal.light : &pal.dark;
            }
            for (int c = 0; c < 3; ++c) canvas.at(x, y, c) = (*colour)[c];
        }
    }

    for (int v_sq = 0; v_sq < 8; ++v_sq) {      // far rows first
        const int cam_rank = 7 - v_sq;
        for (int u_sq = 0; u_sq < 8; ++u_sq) {
            const SquareState s = pos.at(chess_file(cfg.perspective, u_sq),
                                         chess_rank(cfg.perspective, cam_rank));
            if (s == SquareState::Empty) continue;
            const int kind = piece_class(s) % 6;
            const bool white = is_white(s);
            paint_glyph(canvas, sp, u_sq + 0.5, v_sq + 0.9, kind, gs,
                        white ? pal.white_fill : pal.black_fill,
                        white ? pal.white_outline : pal.black_outline);
        }
    }
    return canvas;
}

}  // namespace detail

/// Random plane-to-image homography of a pinhole camera orbiting the
/// board: elevation in the configured range, bounded azimuth and roll,
/// focal length chosen so the board fills fit_min..fit_max of the shorter
/// image side.
inline Homography random_board_homography(const SynthConfig& cfg, std::mt19937_64& rng) {
    const double deg = M_PI / 180.0;
    std::uniform_real_distribution<double> elev_d(cfg.elev_min_deg, cfg.elev_max_deg);
    std::uniform_real_distribution<double> azim_d(-cfg.azimuth_range_deg, cfg.azimuth_range_deg);
    std::uniform_real_distribution<double> roll_d(-cfg.roll_range_deg, cfg.roll_range_deg);
    std::uniform_real_distribution<double> fit_d(cfg.fit_min, cfg.fit_max);
    std::uniform_real_distribution<double> shift_d(-0.04, 0.04);
    const double elev = elev_d(rng) * deg;
    const double azim = azim_d(rng) * deg;
    const double roll = roll_d(rng) * deg;
    const double fit = fit_d(rng);
    const double jx = shift_d(rng) * cfg.out_width;
    const double jy = shift_d(rng) * cfg.out_height;

    const double dist = 20.0;  // board units; board half-diagonal is ~5.7
    const Eigen::Vector3d c(dist * std::cos(elev) * std::sin(azim),
                            -dist * std::cos(elev) * std::cos(azim),
                            dist * std::sin(elev));
    const Eigen::Vector3d fwd = (-c).normalized();
    Eigen::Vector3d right = fwd.cross(Eigen::Vector3d(0, 0, 1)).normalized();
    Eigen::Vector3d down = fwd.cross(right);
    const Eigen::Vector3d r2 = std::cos(roll) * right + std::sin(roll) * down;
    down = -std::sin(roll) * right + std::cos(roll) * down;
    right = r2;

    Eigen::Matrix3d rc;
    rc.row(0) = right;
    rc.row(1) = down;
    rc.row(2) = fwd;

    // Board units (u, v) map to world (u-4, 4-v, 0): v grows toward the
    // camera so the near edge lands at the bottom of the image.
    Eigen::Matrix3d plane;
    plane.col(0) = Eigen::Vector3d(1, 0, 0);
    plane.col(1) = Eigen::Vector3d(0, -1, 0);
    plane.col(2) = Eigen::Vector3d(-4, 4, 0) - c;
    const Eigen::Matrix3d p = rc * plane;

    const Point corners[4] = {{0, 0}, {8, 0}, {8, 8}, {0, 8}};
    double gx = 0, gy = 0;
    std::array<Point, 4> n;
    for (int i = 0; i < 4; ++i) {
        const Eigen::Vector3d h = p * Eigen::Vector3d(corners[i].x, corners[i].y, 1.0);
        if (h.z() <= 1e-9)
            throw std::logic_error("random_board_homography: corner behind camera");
        n[i] = {h.x() / h.z(), h.y() / h.z()};
        gx += n[i].x / 4;
        gy += n[i].y / 4;
    }
    double radius = 0.0;
    for (const auto& q : n)
        radius = std::max({radius, std::fabs(q.x - gx), std::fabs(q.y - gy)});
    const double fpx = fit * std::min(cfg.out_width, cfg.out_height) / 2.0 / radius;

    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = fpx;
    k(1, 1) = fpx;
    k(0, 2) = cfg.out_width / 2.0 - fpx * gx + jx;
    k(1, 2) = cfg.out_height / 2.0 - fpx * gy + jy;
    return Homography::from_matrix(k * p);
}

struct RenderResult {
    Image image;
    LabelRecord label;  // image path left empty; exact corners and fen filled in
};

/// Render a position as a photographed board: flat-colour squares and
/// glyph pieces on a rectified canvas, viewed through a projective camera,
/// 2x2 supersampled, with optional boundary jitter and pixel noise.
/// Deterministic for fixed (fen, cfg).
inline RenderResult render(const std::string& fen, const SynthConfig& cfg) {
    if (cfg.square_px < 20)
        throw std::invalid_argument("render: square_px must be >= 20");
    if (!(cfg.noise_sigma >= 0.0 && cfg.noise_sigma <= 0.1))
        throw std::invalid_argument("render: noise_sigma must lie in [0, 0.1]");
    if (cfg.out_width < 64 || cfg.out_height < 64)
        throw std::invalid_argument("render: output size too small");
    const Position pos = parse_fen(fen);  // throws on malformed fen

    std::mt19937_64 rng(cfg.seed);

    // Internal boundary jitter; outer boundaries (the corners) stay exact.
    std::array<double, 9> bx, by;
    for (int i = 0; i <= 8; ++i) bx[i] = by[i] = i;
    if (cfg.line_jitter_px > 0.0) {
        const double ju = cfg.line_jitter_px / cfg.square_px;
        std::uniform_real_distribution<double> jd(-ju, ju);
        for (int i = 1; i <= 7; ++i) bx[i] = i + jd(rng);
        for (int i = 1; i <= 7; ++i) by[i] = i + jd(rng);
    }

    const Homography h =
        cfg.fixed_h ? *cfg.fixed_h : random_board_homography(cfg, rng);
    const Homography hinv = h.inverse();
    const Image canvas = detail::make_canvas(pos, cfg, bx, by);
    const SynthPalette pal = palette_for_style(cfg.style);

    Image img(cfg.out_width, cfg.out_height, 3);
    const int sp = cfg.square_px;
    const double sub[2] = {-0.25, 0.25};
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc[3] = {0, 0, 0};
            for (double dy : sub)
                for (double dx : sub) {
                    const auto plane = hinv.apply({x + dx, y + dy});
                    double s[3];
                    if (!plane || plane->x < -1.0 || plane->x > 9.0 || plane->y < -1.0 ||
                        plane->y > 9.0) {
                        for (int c = 0; c < 3; ++c) s[c] = pal.table[c];
                    } else {
                        const double cx = (plane->x + 1.0) * sp - 0.5;
                        const double cy = (plane->y + 1.0) * sp - 0.5;
                        for (int c = 0; c < 3; ++c)
                            s[c] = sample_bilinear(canvas, cx, cy, c);
                    }
                    for (int c = 0; c < 3; ++c) acc[c] += s[c];
                }
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = acc[c] / 4.0;
        }

    if (cfg.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
        for (double& v : img.data) v += noise(rng);
    }
    clamp_unit_range(img);

    RenderResult out;
    out.image = std::move(img);
    out.label.fen = emit_fen(pos);
    out.label.perspective = cfg.perspective;
    const Point corners[4] = {{0, 0}, {8, 0}, {8, 8}, {0, 8}};
    for (int i = 0; i < 4; ++i) {
        const auto q = h.apply(corners[i]);
        if (!q) throw std::logic_error("render: corner maps to infinity");
        out.label.corners[i] = *q;
    }
    return out;
}

/// Random positions that pass the static legality check: one king per
/// side, piece counts never exceeding the starting material (so promotion
/// consistency holds), pawns kept off the back ranks. Deterministic per
/// seed, duplicates rejected.
inline std::vector<std::string> sample_positions(int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample_positions: count must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> any_square(0, 63);
    std::uniform_int_distribution<int> pawn_count(0, 8);
    std::uniform_int_distribution<int> minor_count(0, 2);
    std::uniform_int_distribution<int> queen_count(0, 1);

    std::set<std::string> seen;
    std::vector<std::string> out;
    while (static_cast<int>(out.size()) < count) {
        Position p;
        const auto place = [&](SquareState s, bool pawn) {
            for (;;) {
                const int sq = any_square(rng);
                const int rank = sq / 8;
                if (pawn && (rank == 0 || rank == 7)) continue;
                if (p.squares[static_cast<std::size_t>(sq)] != SquareState::Empty) continue;
                p.squares[static_cast<std::size_t>(sq)] = s;
                return;
            }
        };
        for (int side = 0; side < 2; ++side) {
            const int base = side == 0 ? 0 : 6;
            const auto st = [&](int kind) {
                return static_cast<SquareState>(1 + base + kind);
            };
            place(st(5), false);  // king
            const int pawns = pawn_count(rng);
            const int knights = minor_count(rng);
            const int bishops = minor_count(rng);
            const int rooks = minor_count(rng);
            const int queens = queen_count(rng);
            for (int i = 0; i < pawns; ++i) place(st(0), true);
            for (int i = 0; i < knights; ++i) place(st(1), false);
            for (int i = 0; i < bishops; ++i) place(st(2), false);
            for (int i = 0; i < rooks; ++i) place(st(3), false);
            for (int i = 0; i < queens; ++i) place(st(4), false);
        }
        if (!legality_check(p).legal) continue;
        std::string fen = emit_fen(p);
        if (!seen.insert(fen).second) continue;
        out.push_back(std::move(fen));
    }
    return out;
}

}  // namespace chesscv
