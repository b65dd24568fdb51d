#include <chesscv/fewshot.hpp>
#include <chesscv/network.hpp>
#include <chesscv/pipeline.hpp>
#include <chesscv/synth.hpp>

#include <gtest/gtest.h>

#include <array>
#include <map>

using namespace chesscv;

namespace {

const char* kStartFen = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR";

FewShotSet render_starting_shots(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.perspective = Perspective::kWhite;
    FewShotSet shots;
    shots.white_view = render(kStartFen, cfg).image;
    cfg.seed = seed + 1;
    cfg.perspective = Perspective::kBlack;
    shots.black_view = render(kStartFen, cfg).image;
    return shots;
}

bool same_params(const Network& a, const Network& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        const auto pa = a.layers[i]->const_params();
        const auto pb = b.layers[i]->const_params();
        if (pa.size() != pb.size()) return false;
        for (std::size_t j = 0; j < pa.size(); ++j)
            if (pa[j]->v != pb[j]->v) return false;
    }
    return true;
}

}  // namespace

TEST(StartingLabels, WhiteViewHasWhiteArmyNearCamera) {
    const auto labels = starting_position_labels(Perspective::kWhite);
    ASSERT_EQ(labels.size(), 64u);
    // rank-major order with square refs matching the index
    for (int rank = 0; rank < 8; ++rank)
        for (int file = 0; file < 8; ++file) {
            const SquareLabel& l = labels[static_cast<std::size_t>(rank) * 8 + file];
            ASSERT_EQ(l.square.file, file);
            ASSERT_EQ(l.square.rank, rank);
        }
    // near back rank: R N B Q K B N R, white
    const SquareState back[8] = {SquareState::WhiteRook,   SquareState::WhiteKnight,
                                 SquareState::WhiteBishop, SquareState::WhiteQueen,
                                 SquareState::WhiteKing,   SquareState::WhiteBishop,
                                 SquareState::WhiteKnight, SquareState::WhiteRook};
    for (int f = 0; f < 8; ++f) EXPECT_EQ(labels[static_cast<std::size_t>(f)].state, back[f]);
    for (int f = 0; f < 8; ++f)
        EXPECT_EQ(labels[8 + static_cast<std::size_t>(f)].state, SquareState::WhitePawn);
    // middle four ranks empty
    for (int rank = 2; rank < 6; ++rank)
        for (int f = 0; f < 8; ++f)
            EXPECT_EQ(labels[static_cast<std::size_t>(rank) * 8 + f].state, SquareState::Empty);
    for (int f = 0; f < 8; ++f)
        EXPECT_EQ(labels[48 + static_cast<std::size_t>(f)].state, SquareState::BlackPawn);
    EXPECT_EQ(labels[56].state, SquareState::BlackRook);
}

TEST(StartingLabels, BlackViewMirrorsFilesAndRanks) {
    const auto labels = starting_position_labels(Perspective::kBlack);
    // near back rank is black's, with king and queen swapped relative to
    // the white view (file axis mirrored)
    EXPECT_EQ(labels[0].state, SquareState::BlackRook);
    EXPECT_EQ(labels[3].state, SquareState::BlackKing);
    EXPECT_EQ(labels[4].state, SquareState::BlackQueen);
    for (int f = 0; f < 8; ++f)
        EXPECT_EQ(labels[8 + static_cast<std::size_t>(f)].state, SquareState::BlackPawn);
    // far back rank is white's
    EXPECT_EQ(labels[56 + 3].state, SquareState::WhiteKing);
    EXPECT_EQ(labels[56 + 4].state, SquareState::WhiteQueen);
    // both views agree the middle of the board is empty
    for (int rank = 2; rank < 6; ++rank)
        for (int f = 0; f < 8; ++f)
            EXPECT_EQ(labels[static_cast<std::size_t>(rank) * 8 + f].state, SquareState::Empty);
}

TEST(FewShot, DatasetsHaveContractSizesAndFullClassCoverage) {
    const FewShotSet shots = render_starting_shots(301);
    const auto [occ, pieces] = build_fewshot_datasets(shots);

    ASSERT_EQ(occ.size(), 128u);
    ASSERT_EQ(pieces.size(), 64u);
    EXPECT_EQ(occ.width, 100);
    EXPECT_EQ(occ.height, 100);
    EXPECT_EQ(pieces.width, 100);
    EXPECT_EQ(pieces.height, 150);
    EXPECT_EQ(occ.channels, 3);

    // occupancy is balanced: 32 occupied + 32 empty per view
    int occupied = 0;
    for (int l : occ.labels) occupied += l;
    EXPECT_EQ(occupied, 64);

    // every piece class appears, with the starting-material multiplicity
    std::map<int, int> counts;
    for (int l : pieces.labels) ++counts[l];
    ASSERT_EQ(counts.size(), 12u);
    const int expected[12] = {16, 4, 4, 4, 2, 2, 16, 4, 4, 4, 2, 2};
    for (int cls = 0; cls < 12; ++cls) EXPECT_EQ(counts[cls], expected[cls]) << "class " << cls;
}

TEST(FewShot, ZeroStageFinetuneIsBitwiseNoOpAndNeverMutatesInputs) {
    const FewShotSet shots = render_starting_shots(302);
    const Network occ_net = build_occupancy_net(5);
    const Network piece_net = build_piece_net(6);
    const Network occ_copy = occ_net;
    const Network piece_copy = piece_net;

    FinetuneConfig cfg;
    cfg.occupancy_stages = {{true, 1e-3, 0}};  // a stage that never steps
    cfg.piece_stages = {{true, 1e-3, 0}};
    const FinetuneResult r = finetune(occ_net, piece_net, shots, cfg);
    EXPECT_TRUE(r.occupancy_loss.empty());
    EXPECT_TRUE(r.piece_loss.empty());
    EXPECT_TRUE(same_params(r.occupancy, occ_net));
    EXPECT_TRUE(same_params(r.piece, piece_net));
    EXPECT_TRUE(same_params(occ_net, occ_copy));
    EXPECT_TRUE(same_params(piece_net, piece_copy));

    // an empty stage list is a caller error
    FinetuneConfig empty = cfg;
    empty.occupancy_stages.clear();
    EXPECT_THROW(finetune(occ_net, piece_net, shots, empty), std::invalid_argument);
}

TEST(FewShot, ShortFinetuneIsDeterministicAndLeavesInputsUntouched) {
    const FewShotSet shots = render_starting_shots(303);
    const Network occ_net = build_occupancy_net(15);
    const Network piece_net = build_piece_net(16);
    const Network occ_copy = occ_net;
    const Network piece_copy = piece_net;

    FinetuneConfig cfg;
    cfg.occupancy_stages = {{true, 1e-3, 1}};
    cfg.piece_stages = {{true, 1e-3, 1}};
    const FinetuneResult a = finetune(occ_net, piece_net, shots, cfg);
    EXPECT_EQ(a.occupancy_loss.size(), 4u);  // 128 samples / batch 32
    EXPECT_EQ(a.piece_loss.size(), 2u);      // 64 samples / batch 32
    EXPECT_FALSE(same_params(a.occupancy, occ_net));
    EXPECT_FALSE(same_params(a.piece, piece_net));
    // inputs are pristine
    EXPECT_TRUE(same_params(occ_net, occ_copy));
    EXPECT_TRUE(same_params(piece_net, piece_copy));

    const FinetuneResult b = finetune(occ_net, piece_net, shots, cfg);
    EXPECT_TRUE(same_params(a.occupancy, b.occupancy));
    EXPECT_TRUE(same_params(a.piece, b.piece));
    EXPECT_EQ(a.occupancy_loss, b.occupancy_loss);
    EXPECT_EQ(a.piece_loss, b.piece_loss);

    // augmentation changes the piece training path but not occupancy's
    FinetuneConfig no_aug = cfg;
    no_aug.use_augmentation = false;
    const FinetuneResult c = finetune(occ_net, piece_net, shots, no_aug);
    EXPECT_TRUE(same_params(a.occupancy, c.occupancy));
    EXPECT_FALSE(same_params(a.piece, c.piece));
}
