#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "chesscv/board_detect.hpp"
#include "chesscv/chess.hpp"
#include "chesscv/labels.hpp"

namespace chesscv {

/// Recognition quality over a labelled set, one row per headline metric.
/// Stage accuracies (occupancy, piece) are conditional on successful
/// localisation; vacuous denominators report 100.
struct EvalReport {
    double mean_incorrect_squares = 0.0;
    double pct_boards_no_mistakes = 0.0;
    double pct_boards_le1_mistake = 0.0;
    double per_square_error_rate = 0.0;      // percent, failures count 64/64
    double corner_detection_accuracy = 0.0;  // percent of boards, all 4 within 1% width
    double occupancy_accuracy = 0.0;         // percent of squares, localised boards
    double piece_accuracy = 0.0;   // percent of squares occupied in both truth and prediction
    int boards = 0;
    int localisation_failures = 0;
};

/// True when some assignment of predicted to true corners puts every pair
/// within 1% of the image width. Prediction order is not assumed.
inline bool corners_within_tolerance(const CornerSet& pred,
                                     const std::array<Point, 4>& truth,
                                     double image_width) {
    const double tol = 0.01 * image_width;
    const std::array<Point, 4> p = pred.as_array();
    std::array<int, 4> idx = {0, 1, 2, 3};
    do {
        bool ok = true;
        for (int i = 0; i < 4 && ok; ++i) {
            const double dx = p[static_cast<std::size_t>(idx[i])].x - truth[i].x;
            const double dy = p[static_cast<std::size_t>(idx[i])].y - truth[i].y;
            ok = std::hypot(dx, dy) <= tol;
        }
        if (ok) return true;
    } while (std::next_permutation(idx.begin(), idx.end()));
    return false;
}

/// Score predictions against labels. A missing prediction (localisation
/// failure) counts all 64 squares wrong and its corners as missed.
inline EvalReport evaluate(const std::vector<std::optional<Position>>& preds,
                           const std::vector<LabelRecord>& labels,
                           const std::vector<std::optional<CornerSet>>& corner_preds,
                           const std::vector<int>& image_widths) {
    const std::size_t n = labels.size();
    if (preds.size() != n || corner_preds.size() != n || image_widths.size() != n)
        throw std::invalid_argument("evaluate: input lists must have equal length");
    if (n == 0) throw std::invalid_argument("evaluate: empty label set");

    EvalReport r;
    r.boards = static_cast<int>(n);
    std::int64_t wrong_total = 0, boards_clean = 0, boards_le1 = 0, corners_ok = 0;
    std::int64_t occ_squares = 0, occ_correct = 0, piece_squares = 0, piece_correct = 0;

    for (std::size_t i = 0; i < n; ++i) {
        const Position truth = parse_fen(labels[i].fen);
        int wrong = 64;
        if (preds[i]) {
            wrong = 0;
            for (int s = 0; s < 64; ++s) {
                const SquareState t = truth.squares[static_cast<std::size_t>(s)];
                const SquareState p = preds[i]->squares[static_cast<std::size_t>(s)];
                if (t != p) ++wrong;
                ++occ_squares;
                if (is_occupied(t) == is_occupied(p)) ++occ_correct;
                if (is_occupied(t) && is_occupied(p)) {
                    ++piece_squares;
                    if (t == p) ++piece_correct;
                }
            }
        } else {
            ++r.localisation_failures;
        }
        wrong_total += wrong;
        if (wrong == 0) ++boards_clean;
        if (wrong <= 1) ++boards_le1;
        if (corner_preds[i] &&
            corners_within_tolerance(*corner_preds[i], labels[i].corners,
                                     static_cast<double>(image_widths[i])))
            ++corners_ok;
    }

    const double dn = static_cast<double>(n);
    r.mean_incorrect_squares = static_cast<double>(wrong_total) / dn;
    r.pct_boards_no_mistakes = 100.0 * static_cast<double>(boards_clean) / dn;
    r.pct_boards_le1_mistake = 100.0 * static_cast<double>(boards_le1) / dn;
    r.per_square_error_rate = 100.0 * static_cast<double>(wrong_total) / (64.0 * dn);
    r.corner_detection_accuracy = 100.0 * static_cast<double>(corners_ok) / dn;
    r.occupancy_accuracy =
        occ_squares == 0 ? 100.0
                         : 100.0 * static_cast<double>(occ_correct) / static_cast<double>(occ_squares);
    r.piece_accuracy =
        piece_squares == 0
            ? 100.0
            : 100.0 * static_cast<double>(piece_correct) / static_cast<double>(piece_squares);
    return r;
}

}  // namespace chesscv
