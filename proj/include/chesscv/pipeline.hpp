#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chesscv/board_detect.hpp"
#include "chesscv/chess.hpp"
#include "chesscv/crops.hpp"
#include "chesscv/fewshot.hpp"
#include "chesscv/image.hpp"
#include "chesscv/imageio.hpp"
#include "chesscv/labels.hpp"
#include "chesscv/metrics.hpp"
#include "chesscv/network.hpp"
#include "chesscv/synth.hpp"
#include "chesscv/train.hpp"

namespace chesscv {

struct PipelineConfig {
    BoardLocConfig loc;
    CropConfig crop;
    Perspective perspective = Perspective::kWhite;
    std::uint64_t seed = 0;
    std::string models_dir = "models";
    std::string occupancy_model_file = "occupancy.cvnn";
    std::string piece_model_file = "piece.cvnn";

    std::string occupancy_model_path() const { return models_dir + "/" + occupancy_model_file; }
    std::string piece_model_path() const { return models_dir + "/" + piece_model_file; }
};

/// Base-training options for the `train` command. Batch 32 rather than the
/// large-data default: at few-thousand-sample scale the larger batch gives
/// too few optimiser steps per epoch to converge within the epoch budget.
struct TrainOptions {
    int occupancy_epochs = 3;
    int piece_epochs = 6;
    double alpha = 1e-3;
    int batch_size = 32;
    std::uint64_t seed = 1;
    std::uint64_t occupancy_init_seed = 77;
    std::uint64_t piece_init_seed = 78;
};

/// Everything the CLI can configure, one key=value line at a time.
struct AppConfig {
    PipelineConfig pipeline;
    TrainOptions train;
    FinetuneConfig finetune;
    SynthConfig synth;
};

struct Recognition {
    Position position;
    std::string fen;
    CornerSet corners;
    LegalityReport legality;
    std::array<double, 64> confidence{};  // indexed like Position: rank*8 + file
};

namespace detail {

inline Tensor stack_images(const std::vector<Image>& imgs, std::size_t begin, std::size_t end) {
    if (begin >= end || end > imgs.size())
        throw std::invalid_argument("stack_images: empty batch");
    const int c = imgs[begin].channels, h = imgs[begin].height, w = imgs[begin].width;
    Tensor t({static_cast<int>(end - begin), c, h, w});
    double* out = t.v.data();
    for (std::size_t i = begin; i < end; ++i) {
        const Image& img = imgs[i];
        if (img.channels != c || img.height != h || img.width != w)
            throw std::invalid_argument("stack_images: mismatched shapes");
        for (int cc = 0; cc < c; ++cc)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) *out++ = img.at(x, y, cc);
    }
    return t;
}

/// Forward a crop list through the net in bounded-size chunks; returns the
/// concatenated [N, classes] probability rows.
inline Tensor forward_crops(const Network& net, const std::vector<Image>& imgs,
                            std::size_t chunk = 16) {
    if (imgs.empty()) throw std::invalid_argument("forward_crops: empty crop list");
    Tensor all;
    std::size_t row = 0;
    for (std::size_t begin = 0; begin < imgs.size(); begin += chunk) {
        const std::size_t end = std::min(imgs.size(), begin + chunk);
        const Tensor p = net.forward(stack_images(imgs, begin, end));
        if (begin == 0) {
            all = Tensor({static_cast<int>(imgs.size()), p.shape[1]});
        }
        std::copy(p.v.begin(), p.v.end(), all.v.begin() + static_cast<std::ptrdiff_t>(row));
        row += p.v.size();
    }
    return all;
}

}  // namespace detail

/// Full pipeline on one photo: locate the board, classify the 64 squares'
/// occupancy, classify pieces on the occupied squares only, and assemble a
/// Position oriented by the configured perspective. Throws
/// localization_error when no board is found.
inline Recognition recognize(const Image& img, const Network& occupancy_net,
                             const Network& piece_net, const PipelineConfig& cfg = {}) {
    const BoardLocation loc = locate_corners(img, cfg.loc);
    const Image warped = warp_image(img, loc.h, WarpedGrid{0, 8, 0, 8}, cfg.crop);

    std::vector<Image> occ_crops;
    occ_crops.reserve(64);
    for (int rank = 0; rank < 8; ++rank)
        for (int file = 0; file < 8; ++file)
            occ_crops.push_back(occupancy_crop(warped, SquareRef(file, rank), cfg.crop));
    const Tensor occ_probs = detail::forward_crops(occupancy_net, occ_crops);

    std::vector<SquareRef> occupied;
    std::vector<Image> piece_crops;
    Recognition rec;
    rec.corners = loc.corners;
    for (int rank = 0; rank < 8; ++rank)
        for (int file = 0; file < 8; ++file) {
            const int i = rank * 8 + file;
            const double p_empty = occ_probs.v[static_cast<std::size_t>(i) * 2];
            const double p_occ = occ_probs.v[static_cast<std::size_t>(i) * 2 + 1];
            const int chess_idx =
                chess_rank(cfg.perspective, rank) * 8 + chess_file(cfg.perspective, file);
            if (p_occ > p_empty) {
                occupied.emplace_back(file, rank);
                piece_crops.push_back(piece_crop(warped, SquareRef(file, rank), cfg.crop));
            } else {
                rec.confidence[static_cast<std::size_t>(chess_idx)] = p_empty;
            }
        }

    if (!piece_crops.empty()) {
        const Tensor piece_probs = detail::forward_crops(piece_net, piece_crops);
        const int classes = piece_probs.shape[1];
        for (std::size_t k = 0; k < occupied.size(); ++k) {
            const double* row = piece_probs.v.data() + k * static_cast<std::size_t>(classes);
            int best = 0;
            for (int c = 1; c < classes; ++c)
                if (row[c] > row[best]) best = c;
            const int cf = chess_file(cfg.perspective, occupied[k].file);
            const int cr = chess_rank(cfg.perspective, occupied[k].rank);
            rec.position.at(cf, cr) = piece_from_class(best);
            rec.confidence[static_cast<std::size_t>(cr) * 8 + cf] = row[best];
        }
    }

    rec.fen = emit_fen(rec.position);
    rec.legality = legality_check(rec.position);
    return rec;
}

/// Join a label-file-relative image path onto the label file's directory.
inline std::string resolve_image_path(const std::string& base_dir, const std::string& path) {
    if (!path.empty() && path.front() == '/') return path;
    if (base_dir.empty() || base_dir == ".") return path;
    return base_dir + "/" + path;
}

/// Run recognize over every labelled image and score the results.
/// Localisation failures become missing predictions (64 wrong squares).
inline EvalReport evaluate_labels(const std::vector<LabelRecord>& labels,
                                  const std::string& base_dir, const Network& occupancy_net,
                                  const Network& piece_net, const PipelineConfig& cfg,
                                  std::ostream* log = nullptr) {
    if (labels.empty()) throw std::invalid_argument("evaluate_labels: empty label set");
    std::vector<std::optional<Position>> preds;
    std::vector<std::optional<CornerSet>> corners;
    std::vector<int> widths;
    preds.reserve(labels.size());
    corners.reserve(labels.size());
    widths.reserve(labels.size());

    PipelineConfig per_image = cfg;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Image img = load_image(resolve_image_path(base_dir, labels[i].image));
        widths.push_back(img.width);
        per_image.perspective = labels[i].perspective;
        try {
            const Recognition rec = recognize(img, occupancy_net, piece_net, per_image);
            preds.emplace_back(rec.position);
            corners.emplace_back(rec.corners);
            if (log)
                *log << "[" << (i + 1) << "/" << labels.size() << "] " << labels[i].image
                     << ": localised\n";
        } catch (const localization_error& e) {
            preds.emplace_back(std::nullopt);
            corners.emplace_back(std::nullopt);
            if (log)
                *log << "[" << (i + 1) << "/" << labels.size() << "] " << labels[i].image
                     << ": localisation failed (" << e.what() << ")\n";
        }
    }
    return evaluate(preds, labels, corners, widths);
}

namespace detail {

inline double config_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad numeric value for " + key + ": '" + value + "'");
    }
}

inline long long config_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long i = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return i;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer value for " + key + ": '" + value + "'");
    }
}

inline bool config_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes") return true;
    if (value == "0" || value == "false" || value == "no") return false;
    throw std::invalid_argument("config: bad boolean value for " + key + ": '" + value + "'");
}

inline Perspective config_perspective(const std::string& key, const std::string& value) {
    if (value == "white") return Perspective::kWhite;
    if (value == "black") return Perspective::kBlack;
    throw std::invalid_argument("config: bad perspective for " + key + ": '" + value + "'");
}

}  // namespace detail

/// Apply one key=value override. Unknown keys throw (typos should not
/// silently pass). Stage schedules address the two fine-tuning stages as
/// e.g. finetune.occupancy_head_epochs / finetune.occupancy_full_epochs.
inline void apply_config(AppConfig& cfg, const std::string& key, const std::string& value) {
    using detail::config_bool;
    using detail::config_double;
    using detail::config_int;

    const auto as_int = [&](int lo, int hi) {
        const long long v = config_int(key, value);
        if (v < lo || v > hi)
            throw std::invalid_argument("config: " + key + " out of range");
        return static_cast<int>(v);
    };
    const auto as_u64 = [&] { return static_cast<std::uint64_t>(config_int(key, value)); };
    const auto as_dbl = [&] { return config_double(key, value); };

    BoardLocConfig& loc = cfg.pipeline.loc;
    CropConfig& crop = cfg.pipeline.crop;
    FinetuneConfig& fin = cfg.finetune;
    SynthConfig& syn = cfg.synth;
    TrainOptions& tr = cfg.train;

    if (key == "loc.working_long_side") loc.working_long_side = as_int(64, 100000);
    else if (key == "loc.canny_low") loc.canny_low = as_dbl();
    else if (key == "loc.canny_high") loc.canny_high = as_dbl();
    else if (key == "loc.hough_rho_res") loc.hough_rho_res = as_dbl();
    else if (key == "loc.hough_theta_res") loc.hough_theta_res = as_dbl();
    else if (key == "loc.hough_votes_frac") loc.hough_votes_frac = as_dbl();
    else if (key == "loc.hough_max_lines") loc.hough_max_lines = as_int(2, 1000000);
    else if (key == "loc.cluster_min_separation") loc.cluster_min_separation = as_dbl();
    else if (key == "loc.dedup_eps") loc.dedup_eps = as_dbl();
    else if (key == "loc.ransac_gamma") loc.ransac_gamma = as_dbl();
    else if (key == "loc.ransac_max_samples") loc.ransac_max_samples = as_int(1, 100000000);
    else if (key == "loc.ransac_seed") loc.ransac_seed = as_u64();
    else if (key == "loc.completion_band") loc.completion_band = as_dbl();
    else if (key == "loc.completion_px_per_unit") loc.completion_px_per_unit = as_dbl();
    else if (key == "crop.square_px") crop.square_px = as_int(4, 1000);
    else if (key == "crop.margin_squares") crop.margin_squares = as_int(0, 16);
    else if (key == "crop.piece_width_growth") crop.piece_width_growth = as_dbl();
    else if (key == "crop.piece_height_base") crop.piece_height_base = as_dbl();
    else if (key == "crop.piece_height_growth") crop.piece_height_growth = as_dbl();
    else if (key == "crop.occupancy_size") crop.occupancy_size = as_int(4, 1000);
    else if (key == "crop.piece_width") crop.piece_width = as_int(4, 1000);
    else if (key == "crop.piece_height") crop.piece_height = as_int(4, 1000);
    else if (key == "pipeline.perspective")
        cfg.pipeline.perspective = detail::config_perspective(key, value);
    else if (key == "pipeline.seed") cfg.pipeline.seed = as_u64();
    else if (key == "pipeline.models_dir") cfg.pipeline.models_dir = value;
    else if (key == "pipeline.occupancy_model_file") cfg.pipeline.occupancy_model_file = value;
    else if (key == "pipeline.piece_model_file") cfg.pipeline.piece_model_file = value;
    else if (key == "train.occupancy_epochs") tr.occupancy_epochs = as_int(0, 100000);
    else if (key == "train.piece_epochs") tr.piece_epochs = as_int(0, 100000);
    else if (key == "train.alpha") tr.alpha = as_dbl();
    else if (key == "train.batch_size") tr.batch_size = as_int(1, 100000);
    else if (key == "train.seed") tr.seed = as_u64();
    else if (key == "train.occupancy_init_seed") tr.occupancy_init_seed = as_u64();
    else if (key == "train.piece_init_seed") tr.piece_init_seed = as_u64();
    else if (key == "finetune.batch_size") fin.batch_size = as_int(1, 100000);
    else if (key == "finetune.seed") fin.seed = as_u64();
    else if (key == "finetune.use_augmentation") fin.use_augmentation = config_bool(key, value);
    else if (key == "finetune.occupancy_head_epochs") fin.occupancy_stages.at(0).epochs = as_int(0, 100000);
    else if (key == "finetune.occupancy_full_epochs") fin.occupancy_stages.at(1).epochs = as_int(0, 100000);
    else if (key == "finetune.piece_head_epochs") fin.piece_stages.at(0).epochs = as_int(0, 100000);
    else if (key == "finetune.piece_full_epochs") fin.piece_stages.at(1).epochs = as_int(0, 100000);
    else if (key == "finetune.head_alpha") {
        fin.occupancy_stages.at(0).alpha = as_dbl();
        fin.piece_stages.at(0).alpha = fin.occupancy_stages.at(0).alpha;
    } else if (key == "finetune.full_alpha") {
        fin.occupancy_stages.at(1).alpha = as_dbl();
        fin.piece_stages.at(1).alpha = fin.occupancy_stages.at(1).alpha;
    }
    else if (key == "augment.shear_rad") fin.augment.shear_rad = as_dbl();
    else if (key == "augment.scale") fin.augment.scale = as_dbl();
    else if (key == "augment.translate_frac") fin.augment.translate_frac = as_dbl();
    else if (key == "augment.brightness") fin.augment.brightness = as_dbl();
    else if (key == "augment.contrast") fin.augment.contrast = as_dbl();
    else if (key == "augment.saturation") fin.augment.saturation = as_dbl();
    else if (key == "augment.hue") fin.augment.hue = as_dbl();
    else if (key == "augment.seed") fin.augment.seed = as_u64();
    else if (key == "synth.square_px") syn.square_px = as_int(20, 1000);
    else if (key == "synth.width") syn.out_width = as_int(64, 10000);
    else if (key == "synth.height") syn.out_height = as_int(64, 10000);
    else if (key == "synth.style") syn.style = as_int(0, 1);
    else if (key == "synth.perspective") syn.perspective = detail::config_perspective(key, value);
    else if (key == "synth.noise_sigma") syn.noise_sigma = as_dbl();
    else if (key == "synth.line_jitter_px") syn.line_jitter_px = as_dbl();
    else if (key == "synth.elev_min_deg") syn.elev_min_deg = as_dbl();
    else if (key == "synth.elev_max_deg") syn.elev_max_deg = as_dbl();
    else if (key == "synth.azimuth_range_deg") syn.azimuth_range_deg = as_dbl();
    else if (key == "synth.roll_range_deg") syn.roll_range_deg = as_dbl();
    else if (key == "synth.fit_min") syn.fit_min = as_dbl();
    else if (key == "synth.fit_max") syn.fit_max = as_dbl();
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

/// Parse a key=value config stream: one pair per line, '#' starts a
/// comment, blank lines ignored, whitespace around key and value trimmed.
inline void load_config(AppConfig& cfg, std::istream& in, const std::string& source_name) {
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(source_name + ":" + std::to_string(line_no) +
                                        ": expected key = value");
        try {
            apply_config(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(source_name + ":" + std::to_string(line_no) + ": " +
                                        e.what());
        }
    }
}

inline void load_config_file(AppConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open config file");
    load_config(cfg, in, path);
}

}  // namespace chesscv
