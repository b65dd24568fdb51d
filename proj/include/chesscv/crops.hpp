#pragma once

#include <cmath>
#include <stdexcept>

#include "chesscv/board_detect.hpp"
#include "chesscv/geometry.hpp"
#include "chesscv/image.hpp"
#include "chesscv/projective_warp.hpp"

namespace chesscv {

/// Square address in the warped (camera-relative) frame: file 0 is the
/// leftmost column as seen in the image, rank 0 the row nearest the
/// camera (bottom of the warped image). Mapping to chess files/ranks is
/// the caller's job (it depends on which player faces the camera).
struct SquareRef {
    int file = 0;
    int rank = 0;

    SquareRef() = default;
    SquareRef(int f, int r) : file(f), rank(r) {
        if (f < 0 || f > 7 || r < 0 || r > 7)
            throw std::invalid_argument("SquareRef: file/rank out of range");
    }
};

/// Axis-aligned box in warped-image pixels.
struct CropBox {
    double left = 0, top = 0, right = 0, bottom = 0;

    double width() const { return right - left; }
    double height() const { return bottom - top; }
};

struct CropConfig {
    int square_px = 50;             // S: warped pixels per chess square
    int margin_squares = 2;         // black border allowance around the board
    double piece_width_growth = 0.25;   // max outward widening, fraction of S
    double piece_height_base = 1.0;     // upward extension at the near rank, in S
    double piece_height_growth = 1.0;   // additional upward extension at the far rank
    int occupancy_size = 100;       // occupancy net input is square
    int piece_width = 100;          // piece net input
    int piece_height = 150;
};

/// Rectify the image into board space: S px per square plus a
/// margin_squares border on every side, so even the tallest piece crop
/// stays in bounds. `h` maps image pixels onto board units and `grid`
/// names the lattice window to render (the canonical grid is [0,8]^2).
inline Image warp_image(const Image& img, const Homography& h, const WarpedGrid& grid,
                        const CropConfig& cfg = {}) {
    const double m = cfg.margin_squares;
    return warp_units(img, h, grid.x_min - m, grid.y_min - m, grid.x_max + m, grid.y_max + m,
                      cfg.square_px);
}

/// Box of side 2S centred on the square (50% context on every side).
inline CropBox occupancy_box(const SquareRef& sq, const CropConfig& cfg = {}) {
    const double s = cfg.square_px;
    const double cx = (sq.file + 0.5 + cfg.margin_squares) * s;
    const double cy = (7 - sq.rank + 0.5 + cfg.margin_squares) * s;
    return {cx - s, cy - s, cx + s, cy + s};
}

/// Variable-size box for piece classification: widened outward (away from
/// the board's vertical centreline) by up to piece_width_growth*S at the
/// outer files, and extended upward by piece_height_base*S at the near
/// rank growing to (base+growth)*S at the far rank, to catch tall pieces
/// leaning across squares behind them.
inline CropBox piece_box(const SquareRef& sq, const CropConfig& cfg = {}) {
    const double s = cfg.square_px;
    const double left = (sq.file + cfg.margin_squares) * s;
    const double top = (7 - sq.rank + cfg.margin_squares) * s;
    const double ext_w = cfg.piece_width_growth * s * std::fabs(sq.file - 3.5) / 3.5;
    const double ext_h =
        (cfg.piece_height_base + cfg.piece_height_growth * (sq.rank / 7.0)) * s;
    CropBox box{left, top - ext_h, left + s, top + s};
    if (sq.file >= 4)
        box.right += ext_w;
    else
        box.left -= ext_w;
    return box;
}

namespace detail {

inline Image extract_pixels(const Image& warped, int left, int top, int w, int h) {
    Image out(w, h, warped.channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int sx = left + x, sy = top + y;
            if (!warped.in_bounds(sx, sy)) continue;
            for (int c = 0; c < warped.channels; ++c)
                out.at(x, y, c) = warped.at(sx, sy, c);
        }
    return out;
}

}  // namespace detail

/// Contextual crop for the occupancy classifier.
inline Image occupancy_crop(const Image& warped, const SquareRef& sq,
                            const CropConfig& cfg = {}) {
    const CropBox b = occupancy_box(sq, cfg);
    Image raw = detail::extract_pixels(warped, static_cast<int>(std::lround(b.left)),
                                       static_cast<int>(std::lround(b.top)),
                                       static_cast<int>(std::lround(b.width())),
                                       static_cast<int>(std::lround(b.height())));
    if (raw.width == cfg.occupancy_size && raw.height == cfg.occupancy_size) return raw;
    return resize_bilinear(raw, cfg.occupancy_size, cfg.occupancy_size);
}

/// Crop for the piece classifier. The variable box is pasted into a fixed
/// 2S-wide, 3S-tall canvas whose bottom-left S x S cell is the subject
/// square (other canvas pixels stay black), and left-half squares are
/// mirrored so that anchoring holds board-wide.
inline Image piece_crop(const Image& warped, const SquareRef& sq, const CropConfig& cfg = {}) {
    const double s = cfg.square_px;
    const CropBox box = piece_box(sq, cfg);

    // Canvas in warped pixels, before mirroring: anchored at the square's
    // bottom edge, hugging the square's outer-file side.
    const double sq_left = (sq.file + cfg.margin_squares) * s;
    const double sq_bottom = (7 - sq.rank + 1 + cfg.margin_squares) * s;
    const int canvas_w = 2 * cfg.square_px, canvas_h = 3 * cfg.square_px;
    const int cl = static_cast<int>(std::lround(sq.file >= 4 ? sq_left : sq_left + s - canvas_w));
    const int ct = static_cast<int>(std::lround(sq_bottom - canvas_h));

    Image canvas(canvas_w, canvas_h, warped.channels);
    for (int y = 0; y < canvas_h; ++y)
        for (int x = 0; x < canvas_w; ++x) {
            const int px = cl + x, py = ct + y;
            const double pcx = px + 0.5, pcy = py + 0.5;  // pixel centre
            if (pcx < box.left || pcx > box.right || pcy < box.top || pcy > box.bottom)
                continue;
            if (!warped.in_bounds(px, py)) continue;
            for (int c = 0; c < warped.channels; ++c)
                canvas.at(x, y, c) = warped.at(px, py, c);
        }
    if (sq.file < 4) canvas = flip_horizontal(canvas);
    if (canvas.width == cfg.piece_width && canvas.height == cfg.piece_height) return canvas;
    return resize_bilinear(canvas, cfg.piece_width, cfg.piece_height);
}

}  // namespace chesscv
