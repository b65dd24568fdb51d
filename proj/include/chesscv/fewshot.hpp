#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "chesscv/augment.hpp"
#include "chesscv/board_detect.hpp"
#include "chesscv/chess.hpp"
#include "chesscv/crops.hpp"
#include "chesscv/image.hpp"
#include "chesscv/network.hpp"
#include "chesscv/train.hpp"

namespace chesscv {

/// Ground truth for one camera-relative square.
struct SquareLabel {
    SquareRef square;
    SquareState state = SquareState::Empty;
};

/// The 64 square states of the standard starting position as seen from the
/// given side, in camera coordinates (rank 0 = row nearest the camera),
/// ordered rank-major.
inline std::array<SquareLabel, 64> starting_position_labels(Perspective view) {
    const Position start = Position::starting();
    std::array<SquareLabel, 64> out;
    for (int rank = 0; rank < 8; ++rank)
        for (int file = 0; file < 8; ++file) {
            SquareLabel& l = out[static_cast<std::size_t>(rank) * 8 + file];
            l.square = SquareRef(file, rank);
            l.state = start.at(chess_file(view, file), chess_rank(view, rank));
        }
    return out;
}

/// The two unlabelled photos used for adaptation: the starting position
/// seen from the white side and from the black side.
struct FewShotSet {
    Image white_view;
    Image black_view;
};

struct FinetuneConfig {
    std::vector<TrainStage> occupancy_stages = {{true, 1e-3, 100}, {false, 1e-4, 100}};
    std::vector<TrainStage> piece_stages = {{true, 1e-3, 100}, {false, 1e-4, 150}};
    int batch_size = 32;
    std::uint64_t seed = 9;
    bool use_augmentation = true;  // piece stages only; occupancy never augments
    AugmentSpec augment;
    BoardLocConfig loc;
    CropConfig crop;
};

struct FinetuneResult {
    Network occupancy;
    Network piece;
    std::vector<double> occupancy_loss;  // per-batch traces
    std::vector<double> piece_loss;
};

/// Localise both shots and crop them against the known starting position:
/// exactly 128 occupancy samples (64 per view, half occupied) and 64 piece
/// samples (all twelve classes present).
inline std::pair<Dataset, Dataset> build_fewshot_datasets(const FewShotSet& shots,
                                                          const BoardLocConfig& loc_cfg = {},
                                                          const CropConfig& crop_cfg = {}) {
    Dataset occupancy, pieces;
    const std::pair<Perspective, const Image*> views[2] = {
        {Perspective::kWhite, &shots.white_view},
        {Perspective::kBlack, &shots.black_view},
    };
    for (const auto& [view, img] : views) {
        const BoardLocation loc = locate_corners(*img, loc_cfg);
        const Image warped = warp_image(*img, loc.h, WarpedGrid{0, 8, 0, 8}, crop_cfg);
        for (const SquareLabel& l : starting_position_labels(view)) {
            occupancy.append(occupancy_crop(warped, l.square, crop_cfg),
                             occupancy_label(l.state));
            if (l.state != SquareState::Empty)
                pieces.append(piece_crop(warped, l.square, crop_cfg), piece_class(l.state));
        }
    }
    if (occupancy.size() != 128 || pieces.size() != 64)
        throw std::logic_error("build_fewshot_datasets: unexpected dataset sizes");
    return {std::move(occupancy), std::move(pieces)};
}

/// Fine-tune copies of the two classifiers on an unseen chess set given
/// only the two starting-position photos. The inputs are not modified.
/// Deterministic per config.
inline FinetuneResult finetune(const Network& occupancy_net, const Network& piece_net,
                               const FewShotSet& shots, const FinetuneConfig& cfg = {}) {
    auto [occ_data, piece_data] = build_fewshot_datasets(shots, cfg.loc, cfg.crop);

    FinetuneResult out{occupancy_net, piece_net, {}, {}};

    TrainRegimen occ_reg;
    occ_reg.stages = cfg.occupancy_stages;
    occ_reg.batch_size = cfg.batch_size;
    occ_reg.seed = cfg.seed;
    out.occupancy_loss = train(out.occupancy, occ_data, occ_reg);

    TrainRegimen piece_reg;
    piece_reg.stages = cfg.piece_stages;
    piece_reg.batch_size = cfg.batch_size;
    piece_reg.seed = cfg.seed + 1;
    AugmentFn aug;
    if (cfg.use_augmentation) aug = make_piece_augmenter(cfg.augment);
    out.piece_loss = train(out.piece, piece_data, piece_reg, aug);

    return out;
}

}  // namespace chesscv
