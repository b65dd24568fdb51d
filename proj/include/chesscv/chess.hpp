#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace chesscv {

/// One of the 13 square states: empty, or a piece (6 kinds x 2 colours).
enum class SquareState : std::uint8_t {
    Empty = 0,
    WhitePawn, WhiteKnight, WhiteBishop, WhiteRook, WhiteQueen, WhiteKing,
    BlackPawn, BlackKnight, BlackBishop, BlackRook, BlackQueen, BlackKing,
};

constexpr int kSquareStateCount = 13;
constexpr int kPieceClassCount = 12;

inline bool is_white(SquareState s) {
    return s >= SquareState::WhitePawn && s <= SquareState::WhiteKing;
}
inline bool is_black(SquareState s) { return s >= SquareState::BlackPawn; }
inline bool is_occupied(SquareState s) { return s != SquareState::Empty; }

/// 12-way classifier label for a piece (0..11); Empty is not a piece class.
inline int piece_class(SquareState s) {
    if (s == SquareState::Empty)
        throw std::invalid_argument("piece_class: empty square has no piece class");
    return static_cast<int>(s) - 1;
}
constexpr int kOccupancyClassCount = 2;

/// 2-way classifier label for a square: 0 = empty, 1 = occupied.
inline int occupancy_label(SquareState s) { return s == SquareState::Empty ? 0 : 1; }

inline SquareState piece_from_class(int cls) {
    if (cls < 0 || cls >= kPieceClassCount)
        throw std::invalid_argument("piece_from_class: class out of range");
    return static_cast<SquareState>(cls + 1);
}

inline char piece_letter(SquareState s) {
    static constexpr char letters[] = {'.', 'P', 'N', 'B', 'R', 'Q', 'K',
                                       'p', 'n', 'b', 'r', 'q', 'k'};
    return letters[static_cast<int>(s)];
}

inline SquareState piece_from_letter(char c) {
    switch (c) {
        case 'P': return SquareState::WhitePawn;
        case 'N': return SquareState::WhiteKnight;
        case 'B': return SquareState::WhiteBishop;
        case 'R': return SquareState::WhiteRook;
        case 'Q': return SquareState::WhiteQueen;
        case 'K': return SquareState::WhiteKing;
        case 'p': return SquareState::BlackPawn;
        case 'n': return SquareState::BlackKnight;
        case 'b': return SquareState::BlackBishop;
        case 'r': return SquareState::BlackRook;
        case 'q': return SquareState::BlackQueen;
        case 'k': return SquareState::BlackKing;
        default: throw std::invalid_argument(std::string("unknown piece letter '") + c + "'");
    }
}

/// Full board: 64 squares indexed by file (0=a .. 7=h) and rank (0=rank 1
/// .. 7=rank 8).
struct Position {
    std::array<SquareState, 64> squares{};

    SquareState& at(int file, int rank) { return squares[static_cast<std::size_t>(rank) * 8 + file]; }
    SquareState at(int file, int rank) const {
        return squares[static_cast<std::size_t>(rank) * 8 + file];
    }

    bool operator==(const Position&) const = default;

    static Position starting() {
        Position p;
        const std::array<SquareState, 8> back = {
            SquareState::WhiteRook, SquareState::WhiteKnight, SquareState::WhiteBishop,
            SquareState::WhiteQueen, SquareState::WhiteKing, SquareState::WhiteBishop,
            SquareState::WhiteKnight, SquareState::WhiteRook};
        for (int f = 0; f < 8; ++f) {
            p.at(f, 0) = back[static_cast<std::size_t>(f)];
            p.at(f, 1) = SquareState::WhitePawn;
            p.at(f, 6) = SquareState::BlackPawn;
            p.at(f, 7) = static_cast<SquareState>(static_cast<int>(back[static_cast<std::size_t>(f)]) + 6);
        }
        return p;
    }
};

/// Which player faces the camera. Photos are assumed shot from behind the
/// current player, so this fixes how camera-relative squares (file 0 =
/// image left, rank 0 = nearest row) map onto chess files and ranks.
enum class Perspective { kWhite, kBlack };

/// Chess file of a camera-relative square.
inline int chess_file(Perspective view, int camera_file) {
    return view == Perspective::kWhite ? camera_file : 7 - camera_file;
}

/// Chess rank (0-based) of a camera-relative square.
inline int chess_rank(Perspective view, int camera_rank) {
    return view == Perspective::kWhite ? camera_rank : 7 - camera_rank;
}

/// Board field of a FEN string: ranks 8 down to 1, '/'-separated, empty
/// runs as digits. Side-to-move and the other trailing fields are outside
/// what a single photo can determine, so they are never emitted.
inline std::string emit_fen(const Position& p) {
    std::string out;
    for (int rank = 7; rank >= 0; --rank) {
        int run = 0;
        for (int file = 0; file < 8; ++file) {
            const SquareState s = p.at(file, rank);
            if (s == SquareState::Empty) {
                ++run;
                continue;
            }
            if (run > 0) {
                out += static_cast<char>('0' + run);
                run = 0;
            }
            out += piece_letter(s);
        }
        if (run > 0) out += static_cast<char>('0' + run);
        if (rank > 0) out += '/';
    }
    return out;
}

/// Parse the board field of a FEN string; trailing fields (side to move,
/// castling, ...) are tolerated and ignored.
inline Position parse_fen(const std::string& fen) {
    const std::string board = fen.substr(0, fen.find(' '));
    Position p;
    int rank = 7, file = 0;
    for (const char c : board) {
        if (c == '/') {
            if (file != 8)
                throw std::invalid_argument("parse_fen: rank has " + std::to_string(file) +
                                            " squares, expected 8");
            if (rank == 0) throw std::invalid_argument("parse_fen: too many ranks");
            --rank;
            file = 0;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            const int run = c - '0';
            if (run < 1 || file + run > 8)
                throw std::invalid_argument("parse_fen: rank overflow");
            file += run;
        } else {
            if (file >= 8) throw std::invalid_argument("parse_fen: rank overflow");
            p.at(file, rank) = piece_from_letter(c);
            ++file;
        }
    }
    if (rank != 0 || file != 8)
        throw std::invalid_argument("parse_fen: expected 8 ranks of 8 squares");
    return p;
}

struct LegalityReport {
    bool legal = true;
    std::vector<std::string> violations;
};

/// Static material sanity checks: king counts, piece totals, pawn counts,
/// pawns on back ranks, and promotion consistency (surplus pieces beyond
/// the starting material require matching missing pawns). Reachability is
/// deliberately out of scope.
inline LegalityReport legality_check(const Position& p) {
    LegalityReport rep;
    auto flag = [&rep](const std::string& msg) {
        rep.legal = false;
        rep.violations.push_back(msg);
    };

    std::array<int, kSquareStateCount> count{};
    for (const SquareState s : p.squares) ++count[static_cast<std::size_t>(s)];
    auto n = [&count](SquareState s) { return count[static_cast<std::size_t>(s)]; };

    for (bool white : {true, false}) {
        const char* side = white ? "white" : "black";
        const int off = white ? 0 : 6;
        auto piece = [off](SquareState base) {
            return static_cast<SquareState>(static_cast<int>(base) + off);
        };
        const int kings = n(piece(SquareState::WhiteKing));
        if (kings != 1)
            flag(std::string("king count: ") + side + " has " + std::to_string(kings));
        const int pawns = n(piece(SquareState::WhitePawn));
        if (pawns > 8)
            flag(std::string("pawn count: ") + side + " has " + std::to_string(pawns));
        int total = 0;
        for (int k = 1; k <= 6; ++k)
            total += count[static_cast<std::size_t>(k + off)];
        if (total > 16)
            flag(std::string("piece count: ") + side + " has " + std::to_string(total));

        // Surplus beyond starting material must be covered by promotions,
        // i.e. by pawns missing from the board.
        const int start[] = {8, 2, 2, 2, 1};  // P N B R Q
        int surplus = 0;
        for (int k = 0; k < 5; ++k) {
            const int have = count[static_cast<std::size_t>(1 + k + off)];
            surplus += std::max(0, have - start[k]);
        }
        surplus -= std::max(0, 8 - pawns);
        if (surplus > 0)
            flag(std::string("promotion consistency: ") + side + " has " +
                 std::to_string(surplus) + " unexplained extra piece(s)");
    }

    for (int file = 0; file < 8; ++file)
        for (int rank : {0, 7}) {
            const SquareState s = p.at(file, rank);
            if (s == SquareState::WhitePawn || s == SquareState::BlackPawn)
                flag("pawn on back rank: " + std::string(1, static_cast<char>('a' + file)) +
                     std::to_string(rank + 1));
        }
    return rep;
}

}  // namespace chesscv
