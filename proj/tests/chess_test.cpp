#include <chesscv/chess.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace chesscv;

TEST(Fen, StartingPosition) {
    EXPECT_EQ(emit_fen(Position::starting()),
              "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR");
}

TEST(Fen, EmptyBoard) {
    EXPECT_EQ(emit_fen(Position{}), "8/8/8/8/8/8/8/8");
}

TEST(Fen, LoneWhiteKingOnE1) {
    Position p;
    p.at(4, 0) = SquareState::WhiteKing;  // e1
    EXPECT_EQ(emit_fen(p), "8/8/8/8/8/8/8/4K3");
}

TEST(Fen, ParseInvertsEmit) {
    EXPECT_EQ(parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR"),
              Position::starting());
}

TEST(Fen, ParseIgnoresTrailingFields) {
    EXPECT_EQ(parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"),
              Position::starting());
}

TEST(Fen, ParseRejectsMalformedRanks) {
    EXPECT_THROW(parse_fen("9/8/8/8/8/8/8/8"), std::invalid_argument);       // overflow
    EXPECT_THROW(parse_fen("8/8/8/8/8/8/8"), std::invalid_argument);         // 7 ranks
    EXPECT_THROW(parse_fen("8/8/8/8/8/8/8/8/8"), std::invalid_argument);     // 9 ranks
    EXPECT_THROW(parse_fen("7/8/8/8/8/8/8/8"), std::invalid_argument);       // short rank
    EXPECT_THROW(parse_fen("8/8/8/8/8/8/8/4X3"), std::invalid_argument);     // bad letter
    EXPECT_THROW(parse_fen(""), std::invalid_argument);
}

TEST(Fen, RoundTripsOnRandomPositions) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> state(0, kSquareStateCount - 1);
    for (int trial = 0; trial < 1000; ++trial) {
        Position p;
        for (auto& s : p.squares) s = static_cast<SquareState>(state(rng));
        ASSERT_EQ(parse_fen(emit_fen(p)), p) << "trial " << trial << ": " << emit_fen(p);
    }
}

TEST(PieceClasses, RoundTripAndLetters) {
    for (int cls = 0; cls < kPieceClassCount; ++cls) {
        const SquareState s = piece_from_class(cls);
        EXPECT_EQ(piece_class(s), cls);
        EXPECT_EQ(piece_from_letter(piece_letter(s)), s);
    }
    EXPECT_THROW(piece_class(SquareState::Empty), std::invalid_argument);
    EXPECT_THROW(piece_from_class(12), std::invalid_argument);
    EXPECT_THROW(piece_from_letter('x'), std::invalid_argument);
}

TEST(OccupancyLabels, EmptyVsOccupied) {
    EXPECT_EQ(occupancy_label(SquareState::Empty), 0);
    EXPECT_EQ(occupancy_label(SquareState::WhitePawn), 1);
    EXPECT_EQ(occupancy_label(SquareState::BlackKing), 1);
}

TEST(Perspective, CoordinateMapping) {
    // White view: camera file/rank are chess file/rank directly.
    EXPECT_EQ(chess_file(Perspective::kWhite, 0), 0);
    EXPECT_EQ(chess_rank(Perspective::kWhite, 0), 0);
    // Black view: both axes flip (camera bottom-left is h8).
    EXPECT_EQ(chess_file(Perspective::kBlack, 0), 7);
    EXPECT_EQ(chess_rank(Perspective::kBlack, 0), 7);
    EXPECT_EQ(chess_file(Perspective::kBlack, 7), 0);
}

TEST(Legality, StartingPositionIsLegal) {
    const LegalityReport r = legality_check(Position::starting());
    EXPECT_TRUE(r.legal);
    EXPECT_TRUE(r.violations.empty());
}

TEST(Legality, TwoKingsFlagged) {
    Position p = Position::starting();
    p.at(4, 3) = SquareState::WhiteKing;  // second white king on e4
    const LegalityReport r = legality_check(p);
    EXPECT_FALSE(r.legal);
    bool mentions_kings = false;
    for (const auto& v : r.violations)
        if (v.find("king count") != std::string::npos) mentions_kings = true;
    EXPECT_TRUE(mentions_kings);
}

TEST(Legality, PawnOnBackRankFlagged) {
    Position p;
    p.at(4, 0) = SquareState::WhiteKing;
    p.at(4, 7) = SquareState::BlackKing;
    p.at(0, 7) = SquareState::WhitePawn;  // a8
    const LegalityReport r = legality_check(p);
    EXPECT_FALSE(r.legal);
    bool mentions_pawn = false;
    for (const auto& v : r.violations)
        if (v.find("pawn on back rank: a8") != std::string::npos) mentions_pawn = true;
    EXPECT_TRUE(mentions_pawn);
}

TEST(Legality, SeventeenPiecesFlagged) {
    // Full starting material for white (16) plus one extra knight = 17.
    Position p = Position::starting();
    p.at(3, 3) = SquareState::WhiteKnight;
    const LegalityReport r = legality_check(p);
    EXPECT_FALSE(r.legal);
    bool mentions_total = false;
    for (const auto& v : r.violations)
        if (v.find("piece count: white has 17") != std::string::npos) mentions_total = true;
    EXPECT_TRUE(mentions_total);
}

TEST(Legality, NinePawnsFlagged) {
    Position p;
    p.at(4, 0) = SquareState::WhiteKing;
    p.at(4, 7) = SquareState::BlackKing;
    for (int f = 0; f < 8; ++f) p.at(f, 1) = SquareState::WhitePawn;
    p.at(0, 2) = SquareState::WhitePawn;  // ninth pawn
    const LegalityReport r = legality_check(p);
    EXPECT_FALSE(r.legal);
    bool mentions = false;
    for (const auto& v : r.violations)
        if (v.find("pawn count: white has 9") != std::string::npos) mentions = true;
    EXPECT_TRUE(mentions);
}

TEST(Legality, PromotionConsistency) {
    // Two queens with all eight pawns still on the board: impossible.
    Position impossible;
    impossible.at(4, 0) = SquareState::WhiteKing;
    impossible.at(4, 7) = SquareState::BlackKing;
    for (int f = 0; f < 8; ++f) impossible.at(f, 1) = SquareState::WhitePawn;
    impossible.at(3, 0) = SquareState::WhiteQueen;
    impossible.at(3, 3) = SquareState::WhiteQueen;
    EXPECT_FALSE(legality_check(impossible).legal);

    // Two queens with only seven pawns: explained by promotion.
    Position promoted = impossible;
    promoted.at(7, 1) = SquareState::Empty;
    EXPECT_TRUE(legality_check(promoted).legal);
}

TEST(Legality, AddingSecondKingToStartingAlwaysFlagged) {
    // Any single-square corruption that adds a king must be caught.
    for (int sq = 0; sq < 64; ++sq) {
        Position p = Position::starting();
        auto& s = p.squares[static_cast<std::size_t>(sq)];
        if (s == SquareState::WhiteKing || s == SquareState::BlackKing) continue;
        s = SquareState::WhiteKing;
        EXPECT_FALSE(legality_check(p).legal) << "square " << sq;
    }
}
