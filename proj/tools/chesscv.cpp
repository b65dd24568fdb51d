// Command-line front end: recognize a position from a photo, train or
// fine-tune the classifiers, evaluate against a label file, or render
// synthetic labelled boards.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <chesscv/chesscv.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "key=value config file");
    sub->add_option("--set", opts.sets, "override one config key, e.g. --set loc.ransac_gamma=0.2")
        ->take_all();
}

chesscv::AppConfig make_config(const CommonOpts& opts) {
    chesscv::AppConfig cfg;
    if (!opts.config_path.empty()) chesscv::load_config_file(cfg, opts.config_path);
    for (const std::string& kv : opts.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        chesscv::apply_config(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

json recognition_to_json(const chesscv::Recognition& rec) {
    json j;
    j["fen"] = rec.fen;
    std::string squares;
    squares.reserve(64);
    for (const auto s : rec.position.squares) squares.push_back(chesscv::piece_letter(s));
    j["position"] = squares;  // rank-major from rank 1, '.' = empty
    j["corners"] = json::array();
    for (const auto& c : rec.corners.as_array()) j["corners"].push_back({c.x, c.y});
    j["legality"] = {{"legal", rec.legality.legal}, {"violations", rec.legality.violations}};
    j["confidence"] = rec.confidence;
    return j;
}

int cmd_recognize(const std::string& image_path, const CommonOpts& common,
                  const std::string& models_dir, const std::string& perspective,
                  bool as_json, bool strict) {
    chesscv::AppConfig cfg = make_config(common);
    if (!models_dir.empty()) cfg.pipeline.models_dir = models_dir;
    if (!perspective.empty())
        chesscv::apply_config(cfg, "pipeline.perspective", perspective);

    const chesscv::Network occupancy = chesscv::load_network(cfg.pipeline.occupancy_model_path());
    const chesscv::Network piece = chesscv::load_network(cfg.pipeline.piece_model_path());
    const chesscv::Image img = chesscv::load_image(image_path);
    const chesscv::Recognition rec = chesscv::recognize(img, occupancy, piece, cfg.pipeline);

    if (as_json) {
        std::cout << recognition_to_json(rec).dump(2) << "\n";
    } else {
        std::cout << rec.fen << "\n";
        const auto corners = rec.corners.as_array();
        std::cout << "corners:";
        for (const auto& c : corners) std::cout << " (" << fmt(c.x) << ", " << fmt(c.y) << ")";
        std::cout << "\n";
        double min_conf = 1.0;
        for (double c : rec.confidence) min_conf = std::min(min_conf, c);
        std::cout << "min square confidence: " << fmt(min_conf) << "\n";
    }
    if (!rec.legality.legal) {
        std::cerr << "warning: recognised position is illegal:\n";
        for (const auto& v : rec.legality.violations) std::cerr << "  - " << v << "\n";
        if (strict) return 2;
    }
    return 0;
}

/// Rectify every labelled image with its ground-truth corners and collect
/// occupancy and piece crops.
std::pair<chesscv::Dataset, chesscv::Dataset> datasets_from_labels(
    const std::vector<chesscv::LabelRecord>& labels, const std::string& base_dir,
    const chesscv::CropConfig& crop) {
    chesscv::Dataset occupancy, pieces;
    for (const auto& rec : labels) {
        const chesscv::Image img =
            chesscv::load_image(chesscv::resolve_image_path(base_dir, rec.image));
        const chesscv::Homography h = chesscv::homography_from_points(rec.corners, 8.0, 8.0);
        const chesscv::Image warped =
            chesscv::warp_image(img, h, chesscv::WarpedGrid{0, 8, 0, 8}, crop);
        const chesscv::Position truth = chesscv::parse_fen(rec.fen);
        for (int rank = 0; rank < 8; ++rank)
            for (int file = 0; file < 8; ++file) {
                const chesscv::SquareRef sq(file, rank);
                const chesscv::SquareState state =
                    truth.at(chesscv::chess_file(rec.perspective, file),
                             chesscv::chess_rank(rec.perspective, rank));
                occupancy.append(chesscv::occupancy_crop(warped, sq, crop),
                                 chesscv::occupancy_label(state));
                if (state != chesscv::SquareState::Empty)
                    pieces.append(chesscv::piece_crop(warped, sq, crop),
                                  chesscv::piece_class(state));
            }
    }
    return {std::move(occupancy), std::move(pieces)};
}

int cmd_train(const std::string& labels_path, const CommonOpts& common,
              const std::string& out_dir) {
    const chesscv::AppConfig cfg = make_config(common);
    const auto labels = chesscv::load_labels(labels_path);
    if (labels.empty()) throw std::runtime_error(labels_path + ": no label records");
    const std::string base_dir = fs::path(labels_path).parent_path().string();

    auto [occ_data, piece_data] = datasets_from_labels(labels, base_dir, cfg.pipeline.crop);
    std::cout << "datasets: " << occ_data.size() << " occupancy crops, " << piece_data.size()
              << " piece crops from " << labels.size() << " boards\n";

    chesscv::Network occupancy = chesscv::build_occupancy_net(cfg.train.occupancy_init_seed);
    chesscv::Network piece = chesscv::build_piece_net(cfg.train.piece_init_seed);

    chesscv::TrainRegimen occ_reg;
    occ_reg.stages = {{false, cfg.train.alpha, cfg.train.occupancy_epochs}};
    occ_reg.batch_size = cfg.train.batch_size;
    occ_reg.seed = cfg.train.seed;
    chesscv::train(occupancy, occ_data, occ_reg);
    std::cout << "occupancy train accuracy: "
              << fmt(100.0 * chesscv::accuracy(occupancy, occ_data)) << "%\n";

    chesscv::TrainRegimen piece_reg;
    piece_reg.stages = {{false, cfg.train.alpha, cfg.train.piece_epochs}};
    piece_reg.batch_size = cfg.train.batch_size;
    piece_reg.seed = cfg.train.seed + 1;
    chesscv::train(piece, piece_data, piece_reg);
    std::cout << "piece train accuracy: " << fmt(100.0 * chesscv::accuracy(piece, piece_data))
              << "%\n";

    fs::create_directories(out_dir);
    chesscv::save_network(occupancy, out_dir + "/" + cfg.pipeline.occupancy_model_file);
    chesscv::save_network(piece, out_dir + "/" + cfg.pipeline.piece_model_file);
    std::cout << "models written to " << out_dir << "\n";
    return 0;
}

int cmd_finetune(const std::string& white_path, const std::string& black_path,
                 const CommonOpts& common, const std::string& models_dir,
                 const std::string& out_dir) {
    chesscv::AppConfig cfg = make_config(common);
    if (!models_dir.empty()) cfg.pipeline.models_dir = models_dir;
    cfg.finetune.loc = cfg.pipeline.loc;
    cfg.finetune.crop = cfg.pipeline.crop;

    const chesscv::Network occupancy = chesscv::load_network(cfg.pipeline.occupancy_model_path());
    const chesscv::Network piece = chesscv::load_network(cfg.pipeline.piece_model_path());
    chesscv::FewShotSet shots{chesscv::load_image(white_path), chesscv::load_image(black_path)};

    const chesscv::FinetuneResult result =
        chesscv::finetune(occupancy, piece, shots, cfg.finetune);
    if (!result.occupancy_loss.empty())
        std::cout << "occupancy loss: " << fmt(result.occupancy_loss.front()) << " -> "
                  << fmt(result.occupancy_loss.back()) << "\n";
    if (!result.piece_loss.empty())
        std::cout << "piece loss: " << fmt(result.piece_loss.front()) << " -> "
                  << fmt(result.piece_loss.back()) << "\n";

    fs::create_directories(out_dir);
    chesscv::save_network(result.occupancy, out_dir + "/" + cfg.pipeline.occupancy_model_file);
    chesscv::save_network(result.piece, out_dir + "/" + cfg.pipeline.piece_model_file);
    std::cout << "fine-tuned models written to " << out_dir << "\n";
    return 0;
}

int cmd_evaluate(const std::string& labels_path, const CommonOpts& common,
                 const std::string& models_dir, bool verbose) {
    chesscv::AppConfig cfg = make_config(common);
    if (!models_dir.empty()) cfg.pipeline.models_dir = models_dir;

    const chesscv::Network occupancy = chesscv::load_network(cfg.pipeline.occupancy_model_path());
    const chesscv::Network piece = chesscv::load_network(cfg.pipeline.piece_model_path());
    const auto labels = chesscv::load_labels(labels_path);
    if (labels.empty()) throw std::runtime_error(labels_path + ": no label records");
    const std::string base_dir = fs::path(labels_path).parent_path().string();

    const chesscv::EvalReport r =
        chesscv::evaluate_labels(labels, base_dir, occupancy, piece, cfg.pipeline,
                                 verbose ? &std::cerr : nullptr);

    std::cout << "boards evaluated              " << r.boards << "\n"
              << "localisation failures         " << r.localisation_failures << "\n"
              << "mean incorrect squares        " << fmt(r.mean_incorrect_squares) << "\n"
              << "boards with no mistakes       " << fmt(r.pct_boards_no_mistakes) << "%\n"
              << "boards with <=1 mistake       " << fmt(r.pct_boards_le1_mistake) << "%\n"
              << "per-square error rate         " << fmt(r.per_square_error_rate) << "%\n"
              << "corner detection accuracy     " << fmt(r.corner_detection_accuracy) << "%\n"
              << "occupancy accuracy            " << fmt(r.occupancy_accuracy) << "%\n"
              << "piece accuracy                " << fmt(r.piece_accuracy) << "%\n";

    json j;
    j["boards"] = r.boards;
    j["localisation_failures"] = r.localisation_failures;
    j["mean_incorrect_squares"] = r.mean_incorrect_squares;
    j["pct_boards_no_mistakes"] = r.pct_boards_no_mistakes;
    j["pct_boards_le1_mistake"] = r.pct_boards_le1_mistake;
    j["per_square_error_rate"] = r.per_square_error_rate;
    j["corner_detection_accuracy"] = r.corner_detection_accuracy;
    j["occupancy_accuracy"] = r.occupancy_accuracy;
    j["piece_accuracy"] = r.piece_accuracy;
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_synth(int count, std::uint64_t seed, const CommonOpts& common,
              const std::string& out_dir, const std::string& perspective) {
    const chesscv::AppConfig cfg = make_config(common);
    if (count < 1) throw std::invalid_argument("synth: --count must be >= 1");
    fs::create_directories(out_dir);

    const std::vector<std::string> fens = chesscv::sample_positions(count, seed);
    std::vector<chesscv::LabelRecord> labels;
    labels.reserve(fens.size());
    for (int i = 0; i < count; ++i) {
        chesscv::SynthConfig sc = cfg.synth;
        sc.seed = seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1));
        if (perspective == "white")
            sc.perspective = chesscv::Perspective::kWhite;
        else if (perspective == "black")
            sc.perspective = chesscv::Perspective::kBlack;
        else
            sc.perspective =
                i % 2 == 0 ? chesscv::Perspective::kWhite : chesscv::Perspective::kBlack;

        chesscv::RenderResult r = chesscv::render(fens[static_cast<std::size_t>(i)], sc);
        char name[32];
        std::snprintf(name, sizeof name, "board_%04d.png", i);
        chesscv::save_png(r.image, out_dir + "/" + name);
        r.label.image = name;
        labels.push_back(std::move(r.label));
    }
    chesscv::save_labels(labels, out_dir + "/labels.jsonl");
    std::cout << "wrote " << count << " renders and labels.jsonl to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chess position recognition from a single photograph"};
    app.require_subcommand(1);

    // recognize
    auto* rec = app.add_subcommand("recognize", "photo -> FEN");
    std::string rec_image, rec_models, rec_perspective;
    bool rec_json = false, rec_strict = false;
    CommonOpts rec_common;
    rec->add_option("image", rec_image, "input photo (PNG or JPEG)")->required();
    rec->add_option("--models", rec_models, "model directory");
    rec->add_option("--perspective", rec_perspective, "white|black (camera side)")
        ->check(CLI::IsMember({"white", "black"}));
    rec->add_flag("--json", rec_json, "emit JSON instead of text");
    rec->add_flag("--strict", rec_strict, "exit nonzero if the position is illegal");
    add_common(rec, rec_common);

    // train
    auto* tr = app.add_subcommand("train", "train both classifiers from a label file");
    std::string tr_labels, tr_out;
    CommonOpts tr_common;
    tr->add_option("labels", tr_labels, "JSON-lines label file")->required();
    tr->add_option("--out", tr_out, "output model directory")->required();
    add_common(tr, tr_common);

    // finetune
    auto* ft = app.add_subcommand(
        "finetune", "adapt models to an unseen set from two starting-position photos");
    std::string ft_white, ft_black, ft_models, ft_out;
    CommonOpts ft_common;
    ft->add_option("white_view", ft_white, "starting position seen from white")->required();
    ft->add_option("black_view", ft_black, "starting position seen from black")->required();
    ft->add_option("--models", ft_models, "base model directory")->required();
    ft->add_option("--out", ft_out, "output model directory")->required();
    add_common(ft, ft_common);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "score the pipeline against a label file");
    std::string ev_labels, ev_models;
    bool ev_verbose = false;
    CommonOpts ev_common;
    ev->add_option("labels", ev_labels, "JSON-lines label file")->required();
    ev->add_option("--models", ev_models, "model directory");
    ev->add_flag("--verbose", ev_verbose, "log per-board progress to stderr");
    add_common(ev, ev_common);

    // synth
    auto* sy = app.add_subcommand("synth", "render labelled synthetic boards");
    int sy_count = 1;
    std::uint64_t sy_seed = 0;
    std::string sy_out, sy_perspective = "alternate";
    CommonOpts sy_common;
    sy->add_option("--count", sy_count, "number of boards")->required();
    sy->add_option("--seed", sy_seed, "random seed");
    sy->add_option("--out", sy_out, "output directory")->required();
    sy->add_option("--perspective", sy_perspective, "white|black|alternate")
        ->check(CLI::IsMember({"white", "black", "alternate"}));
    add_common(sy, sy_common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (rec->parsed())
            return cmd_recognize(rec_image, rec_common, rec_models, rec_perspective, rec_json,
                                 rec_strict);
        if (tr->parsed()) return cmd_train(tr_labels, tr_common, tr_out);
        if (ft->parsed()) return cmd_finetune(ft_white, ft_black, ft_common, ft_models, ft_out);
        if (ev->parsed()) return cmd_evaluate(ev_labels, ev_common, ev_models, ev_verbose);
        if (sy->parsed()) return cmd_synth(sy_count, sy_seed, sy_common, sy_out, sy_perspective);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
