// dyntex: train kernel-similarity-embedding texture models on frame
// directories, synthesize new sequences, and evaluate/benchmark them.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dyntex/baselines.hpp"
#include "dyntex/error.hpp"
#include "dyntex/frameio.hpp"
#include "dyntex/harness.hpp"
#include "dyntex/kse.hpp"
#include "dyntex/metrics.hpp"
#include "dyntex/simd/vec_ops.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dyntex;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct LoadFlags {
    bool gray = false;
    std::string resize;
    std::size_t max_frames = 0;

    frameio::LoadOptions options() const {
        frameio::LoadOptions opt;
        opt.grayscale = gray;
        if (!resize.empty()) {
            std::size_t w = 0, h = 0;
            if (std::sscanf(resize.c_str(), "%zux%zu", &w, &h) != 2 || w == 0 || h == 0)
                throw UsageError("--resize expects WxH, e.g. 150x100");
            opt.resize = {{w, h}};
        }
        if (max_frames > 0) opt.max_frames = max_frames;
        return opt;
    }
};

void add_load_flags(CLI::App* cmd, LoadFlags& flags) {
    cmd->add_flag("--gray", flags.gray, "Convert frames to grayscale (Rec. 601)");
    cmd->add_option("--resize", flags.resize, "Resize frames to WxH (bilinear)");
    cmd->add_option("--max-frames", flags.max_frames,
                    "Load at most this many frames (0 = all)");
}

frameio::ImageFormat parse_format(const std::string& name) {
    if (name == "png") return frameio::ImageFormat::png;
    if (name == "pgm") return frameio::ImageFormat::pgm;
    throw UsageError("--format expects png or pgm");
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        pos = comma + 1;
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(std::string(what) + ": bad number '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError(std::string(what) + ": empty list");
    return out;
}

std::string read_magic(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() != 4) throw DataError("truncated model file (reading magic)");
    return std::string(magic, 4);
}

// ---- subcommand configs ----

struct TrainArgs {
    std::string frames, out;
    std::string kernel = "gaussian:gamma=auto";
    double lambda = 1e-10;
    LoadFlags load;
};

int cmd_train(const TrainArgs& args) {
    const FrameSequence seq = frameio::load_sequence(args.frames, args.load.options());
    std::cerr << "loaded " << seq.size() << " frames, dim " << seq.geometry().dim() << "\n";
    const kernels::KernelSpec spec = kernels::parse_kernel_spec(args.kernel);

    const double t0 = now_seconds();
    const kse::KseModel model = kse::train(seq, spec, args.lambda);
    const double train_seconds = now_seconds() - t0;

    kse::save_model(model, args.out);
    std::printf(
        "n_frames=%zu n_pairs=%zu dim=%zu lambda=%g kernel=%s jitter=%g train_seconds=%.3f\n",
        seq.size(), model.pair_count(), model.dim(), model.lambda,
        kernels::format_kernel_spec(model.kernel).c_str(), model.jitter_applied,
        train_seconds);
    return 0;
}

struct SynthesizeArgs {
    std::string model, out;
    std::size_t count = 1;
    std::string seed_image;
    std::size_t seed_index = 0;
    std::string format = "png";
};

int cmd_synthesize(const SynthesizeArgs& args) {
    if (!args.seed_image.empty() && args.seed_index > 0)
        throw UsageError("--seed and --seed-index are mutually exclusive");
    const frameio::ImageFormat format = parse_format(args.format);
    const std::string magic = read_magic(args.model);

    FrameSequence result;
    if (magic == "KSE1") {
        const kse::KseModel model = kse::load_model(args.model);
        Frame seed;
        if (!args.seed_image.empty())
            seed = frameio::load_image(args.seed_image);
        else
            seed = kse::training_frame(model, args.seed_index > 0 ? args.seed_index : 1);
        result = kse::synthesize(model, {std::move(seed), args.count});
    } else if (magic == "ELM1") {
        if (args.seed_image.empty())
            throw UsageError("ELM models store no training frames; pass --seed IMG");
        const baselines::ElmModel model = baselines::load_elm_model(args.model);
        result = baselines::elm_synthesize(model, frameio::load_image(args.seed_image),
                                           args.count);
    } else if (magic == "LDS1") {
        if (!args.seed_image.empty() || args.seed_index > 0)
            throw UsageError("LDS models roll out from their stored initial state; "
                             "no seed flags apply");
        const baselines::LdsModel model = baselines::load_lds_model(args.model);
        result = baselines::lds_synthesize(model, args.count);
    } else {
        throw DataError("bad magic: unrecognized model file " + args.model);
    }

    const std::size_t written = frameio::save_sequence(result, args.out, format);
    std::printf("frames_written=%zu out=%s\n", written, args.out.c_str());
    return 0;
}

struct EvaluateArgs {
    std::string observed, generated, csv;
    std::size_t start_index = 2;
    LoadFlags load;
};

int cmd_evaluate(const EvaluateArgs& args) {
    const frameio::LoadOptions opt = args.load.options();
    const FrameSequence observed = frameio::load_sequence(args.observed, opt);
    const FrameSequence generated = frameio::load_sequence(args.generated, opt);

    metrics::PsnrConfig pcfg;
    metrics::SsimConfig scfg;
    pcfg.start_index = args.start_index;
    scfg.start_index = args.start_index;
    const metrics::MetricReport report = metrics::evaluate(observed, generated, pcfg, scfg);

    if (!args.csv.empty()) metrics::write_csv(report, args.csv);
    std::printf("frames_compared=%zu mean_psnr=%.6f mean_ssim=%.6f\n", report.frames_compared,
                report.mean_psnr, report.mean_ssim);
    return 0;
}

struct GridArgs {
    std::string frames, lambdas, gammas, csv, json_path;
    std::size_t train_frames = 0, eval_frames = 0;
    LoadFlags load;
};

int cmd_gridsearch(const GridArgs& args) {
    const FrameSequence seq = frameio::load_sequence(args.frames, args.load.options());

    harness::GridSpec grid;
    grid.lambdas = parse_number_list(args.lambdas, "--lambdas");
    if (args.gammas.find("auto") != std::string::npos) {
        if (args.gammas != "auto")
            throw UsageError("--gammas: 'auto' cannot be mixed with numeric values");
        if (args.train_frames < 2 || args.train_frames > seq.size())
            throw DataError("gridsearch: train frames out of range");
        FrameSequence train_seq;
        for (std::size_t i = 0; i < args.train_frames; ++i) train_seq.push_back(seq[i]);
        grid.gammas = {kernels::median_bandwidth(
            frameio::make_training_pair(frameio::center(train_seq)).explanatory)};
        std::cerr << "auto gamma = " << grid.gammas[0] << "\n";
    } else {
        grid.gammas = parse_number_list(args.gammas, "--gammas");
    }

    const harness::GridResult result =
        harness::run_grid(seq, grid, args.train_frames, args.eval_frames);

    if (!args.csv.empty()) harness::write_grid_csv(result, args.csv);
    if (!args.json_path.empty()) {
        json j;
        j["config"] = {{"frames", args.frames},
                       {"train_frames", args.train_frames},
                       {"eval_frames", args.eval_frames},
                       {"lambdas", grid.lambdas},
                       {"gammas", grid.gammas}};
        j["entries"] = json::array();
        for (const auto& e : result.entries)
            j["entries"].push_back({{"lambda", e.lambda},
                                    {"gamma", e.gamma},
                                    {"mean_psnr", e.mean_psnr},
                                    {"mean_ssim", e.mean_ssim},
                                    {"train_seconds", e.train_seconds}});
        j["best_by_ssim"] = {result.best_by_ssim.first, result.best_by_ssim.second};
        j["best_by_psnr"] = {result.best_by_psnr.first, result.best_by_psnr.second};
        std::ofstream out(args.json_path);
        if (!out) throw DataError("cannot write " + args.json_path);
        out << j.dump(2) << "\n";
    }
    std::printf("cells=%zu best_by_ssim=(%g,%g) best_by_psnr=(%g,%g)\n", result.entries.size(),
                result.best_by_ssim.first, result.best_by_ssim.second,
                result.best_by_psnr.first, result.best_by_psnr.second);
    return 0;
}

struct BaselineArgs {
    std::string kind, frames, out;
    std::size_t state_dim = 30;
    std::size_t hidden = 500;
    double lambda = 1e-6;
    std::string activation = "sigmoid";
    std::uint64_t rng_seed = 42;
    LoadFlags load;
};

int cmd_baseline(const BaselineArgs& args) {
    const FrameSequence seq = frameio::load_sequence(args.frames, args.load.options());
    if (args.kind == "lds") {
        const baselines::LdsModel model = baselines::lds_train(seq, args.state_dim);
        baselines::save_lds_model(model, args.out);
        std::printf("model=lds state_dim=%zu dim=%zu out=%s\n", model.state_dim,
                    model.geometry.dim(), args.out.c_str());
    } else if (args.kind == "elm") {
        const baselines::ElmModel model =
            baselines::elm_train(seq, args.hidden, args.lambda,
                                 args.rng_seed, baselines::parse_activation(args.activation));
        baselines::save_elm_model(model, args.out);
        std::printf("model=elm hidden=%zu dim=%zu lambda=%g rng_seed=%llu out=%s\n",
                    model.hidden_nodes(), model.dim(), model.lambda,
                    static_cast<unsigned long long>(model.rng_seed), args.out.c_str());
    } else {
        throw UsageError("baseline kind must be lds or elm");
    }
    return 0;
}

struct BenchArgs {
    std::string frames;
    std::string kernel = "gaussian:gamma=auto";
    double lambda = 1e-10;
    std::size_t gen = 1200;
    std::string json_path;
    LoadFlags load;
};

int cmd_bench(const BenchArgs& args) {
    const FrameSequence seq = frameio::load_sequence(args.frames, args.load.options());
    const harness::BenchResult result =
        harness::run_bench(seq, kernels::parse_kernel_spec(args.kernel), args.lambda, args.gen);

    json j = {{"config",
               {{"frames", args.frames},
                {"kernel", args.kernel},
                {"lambda", args.lambda},
                {"gen_frames", args.gen},
                {"simd", simd::active_name()}}},
              {"train_frames", result.train_frames},
              {"dim", result.dim},
              {"train_seconds", result.train_seconds},
              {"synth_seconds", result.synth_seconds},
              {"fps", result.fps},
              {"fps_defined", result.fps_defined}};
    if (!args.json_path.empty()) {
        std::ofstream out(args.json_path);
        if (!out) throw DataError("cannot write " + args.json_path);
        out << j.dump(2) << "\n";
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

struct HeatmapArgs {
    std::string frames, csv, pgm;
    std::string kernel = "gaussian:gamma=auto";
    LoadFlags load;
};

int cmd_heatmap(const HeatmapArgs& args) {
    if (args.csv.empty() && args.pgm.empty())
        throw UsageError("heatmap: pass --csv and/or --pgm");
    const FrameSequence seq = frameio::load_sequence(args.frames, args.load.options());
    const kernels::GramMatrix gram = harness::export_gram_heatmap(
        seq, kernels::parse_kernel_spec(args.kernel), args.csv, args.pgm);
    std::printf("gram_order=%zu csv=%s pgm=%s\n", gram.n,
                args.csv.empty() ? "-" : args.csv.c_str(),
                args.pgm.empty() ? "-" : args.pgm.c_str());
    return 0;
}

struct SyntheticArgs {
    std::string out;
    std::string pattern = "translating_sine";
    std::size_t width = 64, height = 48, period = 20, frames = 60;
    double noise = 0.0;
    std::uint64_t rng_seed = 1;
    std::string format = "png";
};

int cmd_synthetic(const SyntheticArgs& args) {
    harness::SyntheticSpec spec;
    spec.pattern = harness::parse_pattern(args.pattern);
    spec.width = args.width;
    spec.height = args.height;
    spec.period = args.period;
    spec.frames = args.frames;
    spec.noise_amp = args.noise;
    spec.rng_seed = args.rng_seed;
    const std::size_t written = frameio::save_sequence(harness::make_synthetic(spec), args.out,
                                                       parse_format(args.format));
    std::printf("frames_written=%zu pattern=%s out=%s\n", written, args.pattern.c_str(),
                args.out.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dyntex: dynamic texture synthesis via kernel similarity embedding"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "dyntex 1.0.0");
    app.footer("Environment: DYNTEX_THREADS caps internal parallelism (0 = all cores);\n"
               "DYNTEX_SIMD selects the vector backend (auto, scalar, avx2, neon).");

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "Train a KSE model on a frame directory");
    train->add_option("--frames", train_args.frames, "Directory of input frames")->required();
    train->add_option("--out", train_args.out, "Output model file (KSE1)")->required();
    train->add_option("--kernel", train_args.kernel,
                      "Kernel spec, e.g. gaussian:gamma=auto, linear, "
                      "polynomial:a=auto,c=1,d=2")
        ->capture_default_str();
    train->add_option("--lambda", train_args.lambda, "Ridge factor")->capture_default_str();
    add_load_flags(train, train_args.load);

    SynthesizeArgs synth_args;
    CLI::App* synth = app.add_subcommand("synthesize", "Generate frames from a model file");
    synth->add_option("--model", synth_args.model, "Model file (KSE1, ELM1, or LDS1)")
        ->required();
    synth->add_option("--count", synth_args.count, "Frames to generate (seed included)")
        ->required();
    synth->add_option("--out", synth_args.out, "Output frame directory")->required();
    synth->add_option("--seed", synth_args.seed_image, "Seed image file");
    synth->add_option("--seed-index", synth_args.seed_index,
                      "Seed from stored training frame K (1-based, KSE only)");
    synth->add_option("--format", synth_args.format, "Output format: png or pgm")
        ->capture_default_str();

    EvaluateArgs eval_args;
    CLI::App* evaluate = app.add_subcommand("evaluate", "PSNR/SSIM of generated vs observed");
    evaluate->add_option("--observed", eval_args.observed, "Observed frame directory")
        ->required();
    evaluate->add_option("--generated", eval_args.generated, "Generated frame directory")
        ->required();
    evaluate->add_option("--csv", eval_args.csv, "Write per-frame metrics CSV");
    evaluate->add_option("--start-index", eval_args.start_index,
                         "First compared frame (1-based)")
        ->capture_default_str();
    add_load_flags(evaluate, eval_args.load);

    GridArgs grid_args;
    CLI::App* gridsearch =
        app.add_subcommand("gridsearch", "Sweep (lambda, gamma) pairs and score each");
    gridsearch->add_option("--frames", grid_args.frames, "Directory of input frames")
        ->required();
    gridsearch->add_option("--lambdas", grid_args.lambdas, "Comma-separated ridge factors")
        ->required();
    gridsearch
        ->add_option("--gammas", grid_args.gammas,
                     "Comma-separated gaussian bandwidths, or 'auto'")
        ->required();
    gridsearch->add_option("--train-frames", grid_args.train_frames, "Training prefix length")
        ->required();
    gridsearch->add_option("--eval-frames", grid_args.eval_frames, "Held-out frames to score")
        ->required();
    gridsearch->add_option("--csv", grid_args.csv, "Write grid results CSV");
    gridsearch->add_option("--json", grid_args.json_path, "Write JSON summary");
    add_load_flags(gridsearch, grid_args.load);

    BaselineArgs baseline_args;
    CLI::App* baseline = app.add_subcommand("baseline", "Train an LDS or ELM baseline model");
    baseline->add_option("kind", baseline_args.kind, "lds or elm")->required();
    baseline->add_option("--frames", baseline_args.frames, "Directory of input frames")
        ->required();
    baseline->add_option("--out", baseline_args.out, "Output model file")->required();
    baseline->add_option("--state-dim", baseline_args.state_dim, "LDS state dimension")
        ->capture_default_str();
    baseline->add_option("--hidden", baseline_args.hidden, "ELM hidden nodes")
        ->capture_default_str();
    baseline->add_option("--lambda", baseline_args.lambda, "ELM ridge factor")
        ->capture_default_str();
    baseline->add_option("--activation", baseline_args.activation, "ELM activation")
        ->capture_default_str();
    baseline->add_option("--rng-seed", baseline_args.rng_seed, "ELM weight seed")
        ->capture_default_str();
    add_load_flags(baseline, baseline_args.load);

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "Time training and synthesis");
    bench->add_option("--frames", bench_args.frames, "Directory of input frames")->required();
    bench->add_option("--kernel", bench_args.kernel, "Kernel spec")->capture_default_str();
    bench->add_option("--lambda", bench_args.lambda, "Ridge factor")->capture_default_str();
    bench->add_option("--gen", bench_args.gen, "Frames to synthesize")->capture_default_str();
    bench->add_option("--json", bench_args.json_path, "Also write the JSON report here");
    add_load_flags(bench, bench_args.load);

    HeatmapArgs heatmap_args;
    CLI::App* heatmap =
        app.add_subcommand("heatmap", "Export the kernel similarity matrix (CSV / PGM)");
    heatmap->add_option("--frames", heatmap_args.frames, "Directory of input frames")
        ->required();
    heatmap->add_option("--kernel", heatmap_args.kernel, "Kernel spec")->capture_default_str();
    heatmap->add_option("--csv", heatmap_args.csv, "Raw values CSV path");
    heatmap->add_option("--pgm", heatmap_args.pgm, "Min-max normalized P5 heatmap path");
    add_load_flags(heatmap, heatmap_args.load);

    SyntheticArgs synthetic_args;
    CLI::App* synthetic =
        app.add_subcommand("synthetic", "Write a deterministic synthetic texture");
    synthetic->add_option("--out", synthetic_args.out, "Output frame directory")->required();
    synthetic
        ->add_option("--pattern", synthetic_args.pattern,
                     "translating_sine, rotating_phase, or saturated_sine")
        ->capture_default_str();
    synthetic->add_option("--width", synthetic_args.width, "Frame width")->capture_default_str();
    synthetic->add_option("--height", synthetic_args.height, "Frame height")
        ->capture_default_str();
    synthetic->add_option("--period", synthetic_args.period, "Cycle length in frames")
        ->capture_default_str();
    synthetic->add_option("--frames", synthetic_args.frames, "Frames to write")
        ->capture_default_str();
    synthetic->add_option("--noise", synthetic_args.noise, "Uniform noise amplitude")
        ->capture_default_str();
    synthetic->add_option("--rng-seed", synthetic_args.rng_seed, "Noise seed")
        ->capture_default_str();
    synthetic->add_option("--format", synthetic_args.format, "Output format: png or pgm")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*train) return cmd_train(train_args);
        if (*synth) return cmd_synthesize(synth_args);
        if (*evaluate) return cmd_evaluate(eval_args);
        if (*gridsearch) return cmd_gridsearch(grid_args);
        if (*baseline) return cmd_baseline(baseline_args);
        if (*bench) return cmd_bench(bench_args);
        if (*heatmap) return cmd_heatmap(heatmap_args);
        if (*synthetic) return cmd_synthetic(synthetic_args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
