#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "chesscv/chess.hpp"
#include "chesscv/geometry.hpp"

namespace chesscv {

/// One labelled board photo: path, ground-truth FEN (board field), the
/// four corner pixels ordered (top-left, top-right, bottom-right,
/// bottom-left) as seen in the image, and which player faces the camera.
struct LabelRecord {
    std::string image;
    std::string fen;
    std::array<Point, 4> corners{};
    Perspective perspective = Perspective::kWhite;

    bool operator==(const LabelRecord& o) const {
        if (image != o.image || fen != o.fen || perspective != o.perspective) return false;
        for (int i = 0; i < 4; ++i)
            if (corners[i].x != o.corners[i].x || corners[i].y != o.corners[i].y) return false;
        return true;
    }
};

inline const char* to_string(Perspective p) {
    return p == Perspective::kWhite ? "white" : "black";
}

/// Load JSON-lines label records. Schema errors name the offending line;
/// out-of-frame corners are tolerated (a warning string is appended to
/// `warnings` when provided, since cropping can still succeed).
inline std::vector<LabelRecord> load_labels(const std::string& path,
                                            std::vector<std::string>* warnings = nullptr) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_labels: cannot open " + path);
    std::vector<LabelRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(where + ": invalid JSON: " + e.what());
        }
        for (const char* key : {"image", "fen", "corners", "perspective"})
            if (!j.contains(key))
                throw std::runtime_error(where + ": missing \"" + key + "\" key");

        LabelRecord rec;
        try {
            rec.image = j["image"].get<std::string>();
            rec.fen = j["fen"].get<std::string>();
            const auto& c = j["corners"];
            if (!c.is_array() || c.size() != 4)
                throw std::runtime_error("corners must be an array of 4 [x,y] pairs");
            for (int i = 0; i < 4; ++i) {
                if (!c[i].is_array() || c[i].size() != 2)
                    throw std::runtime_error("corners must be an array of 4 [x,y] pairs");
                rec.corners[i] = {c[i][0].get<double>(), c[i][1].get<double>()};
            }
            const std::string p = j["perspective"].get<std::string>();
            if (p == "white")
                rec.perspective = Perspective::kWhite;
            else if (p == "black")
                rec.perspective = Perspective::kBlack;
            else
                throw std::runtime_error("perspective must be \"white\" or \"black\"");
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(where + ": " + e.what());
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(where + ": " + e.what());
        }
        try {
            parse_fen(rec.fen);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(where + ": bad fen: " + e.what());
        }
        if (warnings)
            for (const auto& c : rec.corners)
                if (c.x < 0 || c.y < 0) {
                    warnings->push_back(where + ": corner outside image bounds");
                    break;
                }
        out.push_back(std::move(rec));
    }
    return out;
}

/// Write records as JSON lines. Numbers are serialised as shortest
/// round-trip decimals, so save/load is exact.
inline void save_labels(const std::vector<LabelRecord>& records, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("save_labels: cannot open " + path);
    for (const auto& rec : records) {
        nlohmann::json j;
        j["image"] = rec.image;
        j["fen"] = rec.fen;
        j["corners"] = nlohmann::json::array();
        for (const auto& c : rec.corners)
            j["corners"].push_back(nlohmann::json::array({c.x, c.y}));
        j["perspective"] = to_string(rec.perspective);
        f << j.dump() << '\n';
    }
    if (!f) throw std::runtime_error("save_labels: write failed for " + path);
}

}  // namespace chesscv
