#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "swt/bench.hpp"
#include "swt/depth_eval.hpp"
#include "swt/error.hpp"
#include "swt/image_io.hpp"
#include "swt/sfcrf.hpp"
#include "swt/transform.hpp"

namespace fs = std::filesystem;

namespace {

struct WindowFlags {
    int window = 4;
    int rows = 0; // 0 -> window
    int cols = 0;
    int dilation = 1;

    void add(CLI::App* cmd) {
        cmd->add_option("--window", window, "Nodes per window side")->check(CLI::PositiveNumber);
        cmd->add_option("--rows", rows, "Nodes per window column (overrides --window)")->check(CLI::PositiveNumber);
        cmd->add_option("--cols", cols, "Nodes per window row (overrides --window)")->check(CLI::PositiveNumber);
        cmd->add_option("--dilation", dilation, "Angular spacing between nodes, in pixels")
            ->check(CLI::PositiveNumber);
    }

    swt::TemplateConfig config(const swt::ErpGridSpec& grid) const {
        return {rows > 0 ? rows : window, cols > 0 ? cols : window, dilation, grid};
    }
};

struct MapArgs {
    int height = 0;
    int width = 0;
    WindowFlags win;
    bool naive = false;
    bool coords = false;
    int threads = 1;
    std::string output;
};

struct TransformArgs {
    std::string input;
    std::string output;
    std::string map;
    WindowFlags win;
    std::string mode = "nearest";
    int threads = 1;
};

struct ForwardArgs {
    int height = 64;
    std::uint64_t seed = 0;
    std::uint64_t input_seed = 0;
    bool input_seed_set = false;
    int levels = 4;
    int window = 4;
    std::vector<int> channels{16, 32, 64, 64};
    int expansion = 4;
    int heads = 0;
    int threads = 1;
    bool planar = false;
    std::string params;
    std::string save_params;
    std::string output;
    double png_scale = 1000.0;
};

struct EvalArgs {
    std::string pred;
    std::string gt;
    bool align = false;
    double png_scale = 1000.0;
    double min_gt = 0.0;
    double alpha = 10.0;
    double lambda = 0.85;
    std::string json;
    std::string text;
};

struct BenchArgs {
    int height = 512;
    int width = 0;
    int window = 8;
    int reps = 5;
    std::vector<int> kernels{3, 5, 7, 9};
    std::vector<int> windows{4, 8, 16};
    int threads = 1;
    bool skip_baselines = false;
    std::string csv;
    std::string json;
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out || !(out << text)) {
        throw swt::IoError("cannot write '" + path + "'");
    }
}

// Refuses to overwrite an input file.
void check_distinct(const std::string& input, const std::string& output) {
    std::error_code ec;
    if (fs::exists(output, ec) && fs::equivalent(input, output, ec)) {
        throw swt::ConfigError("output '" + output + "' would overwrite input '" + input + "'");
    }
}

std::uint64_t fnv1a(const swt::FeatureMap& f) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (float v : f.values()) {
        unsigned char bytes[4];
        std::memcpy(bytes, &v, 4);
        for (unsigned char b : bytes) {
            h = (h ^ b) * 0x100000001b3ULL;
        }
    }
    return h;
}

int cmd_map(const MapArgs& a) {
    const swt::ErpGridSpec grid(a.height, a.width > 0 ? a.width : 2 * a.height);
    const swt::TemplateConfig cfg = a.win.config(grid);
    swt::BuildStats stats;
    const swt::BuildOptions opts{a.threads, a.coords};
    const swt::IndexMap map =
        a.naive ? swt::build_index_map_naive(cfg, opts, &stats) : swt::build_index_map_fast(cfg, opts, &stats);
    swt::write_index_map(map, a.output, a.coords);
    std::printf("wrote %s: grid %dx%d, %dx%d windows of %dx%d nodes, %zu transforms, %zu rolls\n", a.output.c_str(),
                grid.height, grid.width, map.window_rows(), map.window_cols(), cfg.m_rows, cfg.m_cols,
                stats.window_transforms, stats.rolls);
    return 0;
}

int cmd_transform(const TransformArgs& a) {
    check_distinct(a.input, a.output);
    int bit_depth = 8;
    const swt::FeatureMap image = swt::read_raster(a.input, &bit_depth);
    const swt::SampleMode mode = a.mode == "bilinear" ? swt::SampleMode::bilinear : swt::SampleMode::nearest;
    swt::IndexMap map;
    if (!a.map.empty()) {
        map = swt::read_index_map(a.map);
    } else {
        const swt::TemplateConfig cfg = a.win.config(swt::ErpGridSpec(image.height(), image.width()));
        map = swt::build_index_map_fast(cfg, {a.threads, mode == swt::SampleMode::bilinear});
    }
    const swt::FeatureMap out = swt::merge_windows(swt::sample(image, map, mode, a.threads));
    swt::write_raster(out, a.output, bit_depth);
    std::printf("wrote %s: %dx%dx%d from %dx%d windows (%s)\n", a.output.c_str(), out.height(), out.width(),
                out.channels(), map.window_rows(), map.window_cols(), a.mode.c_str());
    return 0;
}

int cmd_demo_forward(const ForwardArgs& a) {
    swt::DecoderConfig cfg;
    swt::DecoderParams params;
    if (!a.params.empty()) {
        std::tie(params, cfg) = swt::load_decoder_params(a.params);
    } else {
        cfg.levels = a.levels;
        cfg.window = a.window;
        cfg.channels = a.channels;
        cfg.expansion = a.expansion;
        cfg.heads = a.heads;
        cfg.seed = a.seed;
        params = swt::init_decoder_params(cfg);
    }
    if (!a.save_params.empty()) {
        swt::save_decoder_params(params, cfg, a.save_params);
    }
    const auto pyramid = swt::random_pyramid(a.height, 2 * a.height, cfg, a.input_seed_set ? a.input_seed : cfg.seed);
    const swt::FeatureMap depth = swt::decoder_forward(pyramid, cfg, params, {a.threads, !a.planar});

    float lo = depth.values()[0];
    float hi = lo;
    for (float v : depth.values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!a.output.empty()) {
        if (fs::path(a.output).extension() == ".png") {
            swt::FeatureMap scaled = depth;
            for (float& v : scaled.values()) {
                v = static_cast<float>(v * a.png_scale);
            }
            swt::write_png(scaled, a.output, 16);
        } else {
            swt::write_raster(depth, a.output);
        }
    }
    std::printf("depth %dx%dx%d min %.9g max %.9g\n", depth.height(), depth.width(), depth.channels(), lo, hi);
    std::printf("checksum %016llx\n", static_cast<unsigned long long>(fnv1a(depth)));
    return 0;
}

int cmd_eval(const EvalArgs& a) {
    const swt::FeatureMap pred = swt::read_depth(a.pred, a.png_scale);
    const swt::FeatureMap gt = swt::read_depth(a.gt, a.png_scale);
    const swt::DepthPair pair(pred, gt, a.min_gt);
    const swt::DepthMetrics m = swt::evaluate(pair, a.align);
    const double loss = swt::silog(pair, a.alpha, a.lambda);
    char line[64];
    std::snprintf(line, sizeof line, "silog %.10g\n", loss);
    const std::string text = swt::metrics_text(m) + line;
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(swt::metrics_json(m));
    j["silog"] = loss;
    std::fputs(text.c_str(), stdout);
    if (!a.text.empty()) {
        write_text(a.text, text);
    }
    if (!a.json.empty()) {
        write_text(a.json, j.dump(2) + "\n");
    }
    return 0;
}

std::string verdict(bool ok) { return ok ? "yes" : "no"; }

int cmd_bench(const BenchArgs& a) {
    const swt::ErpGridSpec grid(a.height, a.width > 0 ? a.width : 2 * a.height);
    swt::BenchReport report = swt::bench_swt({a.window, a.window, 1, grid}, a.reps, a.threads);
    if (!a.windows.empty()) {
        swt::append(report, swt::bench_swt_windows(grid, a.windows, a.reps, a.threads));
    }
    if (!a.skip_baselines) {
        swt::append(report, swt::bench_baselines(grid, a.kernels, a.reps));
    }
    std::fputs(swt::report_summary(report).c_str(), stdout);

    const swt::BenchCase* fast = report.find("swt_fast");
    std::vector<const swt::BenchCase*> tangents;
    for (int k : a.kernels) {
        if (const swt::BenchCase* c = report.find("tangent_k" + std::to_string(k))) {
            tangents.push_back(c);
        }
    }
    if (!tangents.empty()) {
        std::printf("swt_fast < %s: %s\n", tangents.front()->name.c_str(),
                    verdict(fast->median_s < tangents.front()->median_s).c_str());
        bool increasing = true;
        for (std::size_t i = 1; i < tangents.size(); ++i) {
            increasing = increasing && tangents[i]->median_s > tangents[i - 1]->median_s;
        }
        std::printf("tangent time increasing with kernel size: %s\n", verdict(increasing).c_str());
    }
    if (a.windows.size() > 1) {
        bool decreasing = true;
        for (std::size_t i = 1; i < a.windows.size(); ++i) {
            const auto* prev = report.find("swt_fast_w" + std::to_string(a.windows[i - 1]));
            const auto* cur = report.find("swt_fast_w" + std::to_string(a.windows[i]));
            decreasing = decreasing && cur->median_s < prev->median_s;
        }
        std::printf("fast-path time decreasing with window size: %s\n", verdict(decreasing).c_str());
    }
    if (!a.csv.empty()) {
        write_text(a.csv, swt::report_csv(report));
    }
    if (!a.json.empty()) {
        write_text(a.json, swt::report_json(report));
    }
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"Spherical window transform toolkit for equirectangular images"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read option defaults from a key = value file");
    app.set_version_flag("--version", "swt 0.1.0");

    MapArgs map_args;
    auto* map_cmd = app.add_subcommand("map", "Build a window index map and write it as SWTM");
    map_cmd->add_option("--height", map_args.height, "ERP height in pixels")->required()->check(CLI::PositiveNumber);
    map_cmd->add_option("--width", map_args.width, "ERP width in pixels (default 2 * height)");
    map_args.win.add(map_cmd);
    map_cmd->add_flag("--naive", map_args.naive, "Rotate every window instead of rolling column 0");
    map_cmd->add_flag("--coords", map_args.coords, "Store continuous coordinates for bilinear sampling");
    map_cmd->add_option("--threads", map_args.threads, "Worker threads")->check(CLI::PositiveNumber);
    map_cmd->add_option("-o,--output", map_args.output, "SWTM output file")->required();

    TransformArgs tr_args;
    auto* tr_cmd = app.add_subcommand("transform", "Resample an image through the window transform");
    tr_cmd->add_option("-i,--input", tr_args.input, "Input raster (.png, .fmap, .pfm)")->required();
    tr_cmd->add_option("-o,--output", tr_args.output, "Output raster (.png, .fmap, .pfm)")->required();
    tr_cmd->add_option("--map", tr_args.map, "Use a precomputed SWTM map");
    tr_args.win.add(tr_cmd);
    tr_cmd->add_option("--mode", tr_args.mode, "Sampling mode")->check(CLI::IsMember({"nearest", "bilinear"}));
    tr_cmd->add_option("--threads", tr_args.threads, "Worker threads")->check(CLI::PositiveNumber);

    ForwardArgs fw_args;
    auto* fw_cmd = app.add_subcommand("demo-forward", "Run the seeded toy decoder on random features");
    fw_cmd->add_option("--height", fw_args.height, "Output height (width is 2 * height)")
        ->check(CLI::PositiveNumber);
    fw_cmd->add_option("--seed", fw_args.seed, "Parameter seed");
    fw_cmd->add_option("--input-seed", fw_args.input_seed, "Feature seed (default: parameter seed)")
        ->each([&](const std::string&) { fw_args.input_seed_set = true; });
    fw_cmd->add_option("--levels", fw_args.levels, "Decoder levels")->check(CLI::PositiveNumber);
    fw_cmd->add_option("--window", fw_args.window, "Window size")->check(CLI::PositiveNumber);
    fw_cmd->add_option("--channels", fw_args.channels, "Channels per level, finest first")->delimiter(',');
    fw_cmd->add_option("--expansion", fw_args.expansion, "MLP expansion ratio")->check(CLI::PositiveNumber);
    fw_cmd->add_option("--heads", fw_args.heads, "Attention heads (0: channels / 32)");
    fw_cmd->add_option("--threads", fw_args.threads, "Worker threads")->check(CLI::PositiveNumber);
    fw_cmd->add_flag("--planar", fw_args.planar, "Use regular windows instead of the spherical transform");
    fw_cmd->add_option("--params", fw_args.params, "Load a parameter bundle directory");
    fw_cmd->add_option("--save-params", fw_args.save_params, "Write the parameters as a bundle directory");
    fw_cmd->add_option("-o,--output", fw_args.output, "Depth output (.fmap, .pfm, or 16-bit .png)");
    fw_cmd->add_option("--png-scale", fw_args.png_scale, "PNG units per meter")->check(CLI::PositiveNumber);

    EvalArgs ev_args;
    auto* ev_cmd = app.add_subcommand("eval", "Depth metrics of a prediction against ground truth");
    ev_cmd->add_option("--pred", ev_args.pred, "Predicted depth")->required();
    ev_cmd->add_option("--gt", ev_args.gt, "Ground-truth depth (0 = unobserved)")->required();
    ev_cmd->add_flag("--align", ev_args.align, "Median-align the prediction first");
    ev_cmd->add_option("--png-scale", ev_args.png_scale, "PNG units per meter")->check(CLI::PositiveNumber);
    ev_cmd->add_option("--min-gt", ev_args.min_gt, "Ground truth must exceed this to count as observed");
    ev_cmd->add_option("--alpha", ev_args.alpha, "SILog scale");
    ev_cmd->add_option("--lambda", ev_args.lambda, "SILog variance weight");
    ev_cmd->add_option("--json", ev_args.json, "Write metrics as JSON");
    ev_cmd->add_option("--text", ev_args.text, "Write metrics as text");

    BenchArgs bn_args;
    auto* bn_cmd = app.add_subcommand("bench", "Time map construction and the tangent/cube baselines");
    bn_cmd->add_option("--height", bn_args.height, "ERP height")->check(CLI::PositiveNumber);
    bn_cmd->add_option("--width", bn_args.width, "ERP width (default 2 * height)");
    bn_cmd->add_option("--window", bn_args.window, "Window size for fast vs naive")->check(CLI::PositiveNumber);
    bn_cmd->add_option("--reps", bn_args.reps, "Repetitions per case (>= 3)");
    bn_cmd->add_option("--kernels", bn_args.kernels, "Tangent kernel sizes")->delimiter(',');
    bn_cmd->add_option("--windows", bn_args.windows, "Window sizes for the fast-path sweep")->delimiter(',');
    bn_cmd->add_option("--threads", bn_args.threads, "Threads for map construction")->check(CLI::PositiveNumber);
    bn_cmd->add_flag("--skip-baselines", bn_args.skip_baselines, "Only time the window transform");
    bn_cmd->add_option("--csv", bn_args.csv, "Write the report as CSV");
    bn_cmd->add_option("--json", bn_args.json, "Write the report as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error[usage]: %s\n", e.what());
        return 2;
    }

    if (map_cmd->parsed()) {
        return cmd_map(map_args);
    }
    if (tr_cmd->parsed()) {
        return cmd_transform(tr_args);
    }
    if (fw_cmd->parsed()) {
        return cmd_demo_forward(fw_args);
    }
    if (ev_cmd->parsed()) {
        return cmd_eval(ev_args);
    }
    return cmd_bench(bn_args);
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const swt::Error& e) {
        std::fprintf(stderr, "error[%.*s]: %s\n", static_cast<int>(e.category().size()), e.category().data(),
                     e.what());
    } catch (const std::bad_alloc&) {
        std::fprintf(stderr, "error[resource]: out of memory\n");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error[internal]: %s\n", e.what());
    }
    return 1;
}
