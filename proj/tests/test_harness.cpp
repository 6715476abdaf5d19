#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dyntex/frameio.hpp"
#include "dyntex/harness.hpp"

using namespace dyntex;
namespace fs = std::filesystem;

namespace {

harness::SyntheticSpec sine_spec(std::size_t frames = 30, std::size_t period = 10) {
    harness::SyntheticSpec spec;
    spec.pattern = harness::SyntheticPattern::translating_sine;
    spec.width = 32;
    spec.height = 24;
    spec.period = period;
    spec.frames = frames;
    return spec;
}

kernels::KernelSpec gaussian_auto() {
    kernels::KernelSpec s;
    s.family = kernels::KernelFamily::gaussian;
    return s;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("dyntex_harness_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("synthetic sequences are periodic, deterministic, and in range") {
    for (const auto pattern :
         {harness::SyntheticPattern::translating_sine, harness::SyntheticPattern::rotating_phase,
          harness::SyntheticPattern::saturated_sine}) {
        harness::SyntheticSpec spec = sine_spec(40, 20);
        spec.pattern = pattern;

        const FrameSequence a = harness::make_synthetic(spec);
        const FrameSequence b = harness::make_synthetic(spec);
        REQUIRE(a.size() == 40);
        for (std::size_t l = 0; l < 40; ++l) CHECK(a[l].data == b[l].data);

        // frame 21 equals frame 1 bit-exactly (period 20, no noise)
        CHECK(a[20].data == a[0].data);
        CHECK(a[39].data == a[19].data);

        for (const Frame& f : a)
            for (const double v : f.data) {
                CHECK(v >= 0.0);
                CHECK(v <= 255.0);
            }

        // the analytic continuation agrees with the generated frames
        for (std::size_t l = 1; l <= 40; ++l)
            CHECK(harness::synthetic_frame(spec, l).data == a[l - 1].data);
    }
}

TEST_CASE("noisy synthetic sequences stay deterministic per seed") {
    harness::SyntheticSpec spec = sine_spec();
    spec.noise_amp = 3.0;
    spec.rng_seed = 99;
    const FrameSequence a = harness::make_synthetic(spec);
    const FrameSequence b = harness::make_synthetic(spec);
    for (std::size_t l = 0; l < a.size(); ++l) CHECK(a[l].data == b[l].data);
    spec.rng_seed = 100;
    const FrameSequence c = harness::make_synthetic(spec);
    CHECK(a[0].data != c[0].data);
    for (const Frame& f : c)
        for (const double v : f.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 255.0);
        }
}

TEST_CASE("synthetic spec validation") {
    harness::SyntheticSpec spec = sine_spec();
    spec.period = 1;
    CHECK_THROWS_AS(static_cast<void>(harness::make_synthetic(spec)), DataError);
    spec = sine_spec();
    spec.frames = 5; // < period
    CHECK_THROWS_AS(static_cast<void>(harness::make_synthetic(spec)), DataError);
    spec = sine_spec();
    spec.noise_amp = -1.0;
    CHECK_THROWS_AS(static_cast<void>(harness::make_synthetic(spec)), DataError);
    CHECK_THROWS_AS(static_cast<void>(harness::parse_pattern("wibble")), DataError);
}

TEST_CASE("1x1 grid returns its single pair as best") {
    const FrameSequence seq = harness::make_synthetic(sine_spec());
    harness::GridSpec grid;
    grid.lambdas = {1e-8};
    grid.gammas = {kernels::median_bandwidth(
        frameio::make_training_pair(frameio::center(seq)).explanatory)};
    const harness::GridResult result = harness::run_grid(seq, grid, 20, 10);
    REQUIRE(result.entries.size() == 1);
    CHECK(result.best_by_ssim.first == 1e-8);
    CHECK(result.best_by_psnr.first == 1e-8);
    CHECK(result.best_by_ssim.second == grid.gammas[0]);
}

TEST_CASE("grid best matches an independent exhaustive re-evaluation") {
    const FrameSequence seq = harness::make_synthetic(sine_spec());
    harness::GridSpec grid;
    grid.lambdas = {1e-8, 1e-2, 10.0};
    grid.gammas = {1e4, 1e6, 1e8};
    const std::size_t train = 20, eval = 10;
    const harness::GridResult result = harness::run_grid(seq, grid, train, eval);
    REQUIRE(result.entries.size() == 9);

    // independent loop: re-train and re-score every cell, then argmax
    FrameSequence train_seq, observed;
    for (std::size_t i = 0; i < train; ++i) train_seq.push_back(seq[i]);
    for (std::size_t i = 0; i < train + eval; ++i) observed.push_back(seq[i]);

    double best_ssim = -2.0, best_psnr = -2.0;
    std::pair<double, double> by_ssim{0, 0}, by_psnr{0, 0};
    std::size_t idx = 0;
    for (const double lambda : grid.lambdas) {
        for (const double gamma : grid.gammas) {
            kernels::KernelSpec spec;
            spec.family = kernels::KernelFamily::gaussian;
            spec.gamma = gamma;
            const kse::KseModel model = kse::train(train_seq, spec, lambda);
            const FrameSequence synth =
                kse::synthesize(model, {kse::training_frame(model, 1), train + eval});
            const metrics::MetricReport rep = metrics::evaluate(observed, synth);

            // entries come back in lambda-major order with matching scores
            CHECK(result.entries[idx].lambda == lambda);
            CHECK(result.entries[idx].gamma == gamma);
            CHECK(result.entries[idx].mean_ssim == doctest::Approx(rep.mean_ssim).epsilon(1e-12));
            CHECK(result.entries[idx].mean_psnr == doctest::Approx(rep.mean_psnr).epsilon(1e-12));
            ++idx;

            if (rep.mean_ssim > best_ssim) {
                best_ssim = rep.mean_ssim;
                by_ssim = {lambda, gamma};
            }
            if (rep.mean_psnr > best_psnr) {
                best_psnr = rep.mean_psnr;
                by_psnr = {lambda, gamma};
            }
        }
    }
    CHECK(result.best_by_ssim == by_ssim);
    CHECK(result.best_by_psnr == by_psnr);
}

TEST_CASE("over-regularized grid entries score strictly below the optimum") {
    const FrameSequence seq = harness::make_synthetic(sine_spec());
    harness::GridSpec grid;
    grid.lambdas = {1e-8, 100.0, 1000.0};
    grid.gammas = {1e5, 1e7};
    const harness::GridResult result = harness::run_grid(seq, grid, 20, 10);
    double best = -2.0;
    for (const auto& e : result.entries) best = std::max(best, e.mean_ssim);
    for (const auto& e : result.entries)
        if (e.lambda >= 100.0) CHECK(e.mean_ssim < best);
}

TEST_CASE("grid runs are bit-deterministic (timings aside)") {
    const FrameSequence seq = harness::make_synthetic(sine_spec());
    harness::GridSpec grid;
    grid.lambdas = {1e-8, 1e-4};
    grid.gammas = {1e5, 1e7};
    const harness::GridResult a = harness::run_grid(seq, grid, 20, 8);
    const harness::GridResult b = harness::run_grid(seq, grid, 20, 8);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].mean_psnr == b.entries[i].mean_psnr); // bitwise
        CHECK(a.entries[i].mean_ssim == b.entries[i].mean_ssim);
    }
    CHECK(a.best_by_ssim == b.best_by_ssim);
    CHECK(a.best_by_psnr == b.best_by_psnr);
}

TEST_CASE("results are bit-identical across worker counts") {
    const FrameSequence seq = harness::make_synthetic(sine_spec());
    harness::GridSpec grid;
    grid.lambdas = {1e-8, 1e-2};
    grid.gammas = {1e6};

    setenv("DYNTEX_THREADS", "1", 1);
    const harness::GridResult serial = harness::run_grid(seq, grid, 20, 8);
    const kernels::GramMatrix gram1 = harness::gram_of_sequence(seq, gaussian_auto());
    setenv("DYNTEX_THREADS", "0", 1);
    const harness::GridResult threaded = harness::run_grid(seq, grid, 20, 8);
    const kernels::GramMatrix gram2 = harness::gram_of_sequence(seq, gaussian_auto());
    unsetenv("DYNTEX_THREADS");

    CHECK(gram1.values == gram2.values);
    REQUIRE(serial.entries.size() == threaded.entries.size());
    for (std::size_t i = 0; i < serial.entries.size(); ++i) {
        CHECK(serial.entries[i].mean_psnr == threaded.entries[i].mean_psnr);
        CHECK(serial.entries[i].mean_ssim == threaded.entries[i].mean_ssim);
    }
}

TEST_CASE("grid argmax tie-breaking prefers the smallest lambda, then gamma") {
    // a constant-valued metric surface forces ties: identical observed
    // frames are impossible here, so instead check the documented rule on
    // a synthetic GridResult via run_grid of one duplicated lambda value
    const FrameSequence seq = harness::make_synthetic(sine_spec());
    harness::GridSpec grid;
    grid.lambdas = {1e-8, 1e-8}; // duplicate -> equal scores
    grid.gammas = {1e6};
    const harness::GridResult result = harness::run_grid(seq, grid, 20, 6);
    CHECK(result.best_by_ssim == std::pair<double, double>{1e-8, 1e6});
}

TEST_CASE("grid validation") {
    const FrameSequence seq = harness::make_synthetic(sine_spec());
    harness::GridSpec grid;
    grid.lambdas = {};
    grid.gammas = {1.0};
    CHECK_THROWS_AS(static_cast<void>(harness::run_grid(seq, grid, 20, 5)), DataError);
    grid.lambdas = {-1.0};
    CHECK_THROWS_AS(static_cast<void>(harness::run_grid(seq, grid, 20, 5)), DataError);
    grid.lambdas = {1e-8};
    CHECK_THROWS_AS(static_cast<void>(harness::run_grid(seq, grid, 28, 5)), DataError);
}

TEST_CASE("grid CSV has the documented header and row count") {
    const FrameSequence seq = harness::make_synthetic(sine_spec());
    harness::GridSpec grid;
    grid.lambdas = {1e-8, 1e-4};
    grid.gammas = {1e6};
    const harness::GridResult result = harness::run_grid(seq, grid, 20, 6);
    std::istringstream csv(harness::grid_csv(result));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "lambda,gamma,mean_psnr,mean_ssim,train_seconds");
    std::size_t rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == 2);
}

TEST_CASE("sustainability holds on a noiseless periodic texture") {
    harness::SyntheticSpec spec = sine_spec(60, 20);
    const FrameSequence seq = harness::make_synthetic(spec);
    const harness::SustainabilityResult result =
        harness::run_sustainability(seq, gaussian_auto(), 1e-8, 60, 400);

    CHECK(result.observed_frames == 60);
    CHECK(result.horizon == 400);
    REQUIRE(result.checkpoints.size() == 4);
    // frame-100 checkpoint has no observed frame: synthesis-only
    CHECK_FALSE(result.checkpoints[0].ssim.has_value());

    // score the full horizon against the analytic continuation
    const FrameSequence truth = harness::synthetic_continuation(spec, 1, 400);
    const kse::KseModel model = kse::train(seq, gaussian_auto(), 1e-8);
    const FrameSequence synth = kse::synthesize(model, {kse::training_frame(model, 1), 400});
    const metrics::MetricReport rep = metrics::evaluate(truth, synth);
    CHECK(rep.mean_ssim >= 0.95);
}

TEST_CASE("horizon equal to train_frames reduces to plain evaluation") {
    const FrameSequence seq = harness::make_synthetic(sine_spec(30, 10));
    const harness::SustainabilityResult result =
        harness::run_sustainability(seq, gaussian_auto(), 1e-8, 30, 30);
    CHECK(result.observed_frames == 30);
    CHECK(result.report.frames_compared == 29);
    CHECK_THROWS_AS(static_cast<void>(
                        harness::run_sustainability(seq, gaussian_auto(), 1e-8, 30, 29)),
                    DataError);
}

TEST_CASE("transfer between sequences with shared dynamics but shifted phase") {
    harness::SyntheticSpec spec_a = sine_spec(40, 20);
    const FrameSequence seq_a = harness::make_synthetic(spec_a);

    // same dynamics, different phase: start the second sequence mid-cycle
    const FrameSequence seq_b = harness::synthetic_continuation(spec_a, 8, 40);

    const kse::KseModel model_a = kse::train(seq_a, gaussian_auto(), 1e-8);
    const kse::KseModel model_b = kse::train(seq_b, gaussian_auto(), 1e-8);

    const std::vector<Frame> seeds = {seq_a[0], seq_b[0]};
    const std::vector<const FrameSequence*> observed = {&seq_a, &seq_b};
    const auto cells = harness::run_transfer({&model_a, &model_b}, seeds, 40, observed);

    REQUIRE(cells.size() == 2);
    REQUIRE(cells[0].size() == 2);
    for (const auto& row : cells)
        for (const auto& cell : row) {
            REQUIRE_FALSE(cell.failed);
            REQUIRE(cell.report.has_value());
            CHECK(cell.report->mean_ssim >= 0.9); // cross-phase transfer works
        }
}

TEST_CASE("transfer marks incompatible cells failed and continues") {
    const FrameSequence seq = harness::make_synthetic(sine_spec(30, 10));
    const kse::KseModel model = kse::train(seq, gaussian_auto(), 1e-8);
    Frame wrong({4, 4, 1}, 1.0);
    const auto cells = harness::run_transfer({&model}, {wrong, seq[0]}, 10);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0][0].failed);
    CHECK_FALSE(cells[0][1].failed);
    CHECK(cells[0][1].synthesized.size() == 10);
}

TEST_CASE("bench reports timings; zero generated frames flags undefined fps") {
    const FrameSequence seq = harness::make_synthetic(sine_spec(30, 10));
    const harness::BenchResult idle = harness::run_bench(seq, gaussian_auto(), 1e-8, 0);
    CHECK(idle.fps == 0.0);
    CHECK_FALSE(idle.fps_defined);
    CHECK(idle.train_seconds >= 0.0);

    const harness::BenchResult run = harness::run_bench(seq, gaussian_auto(), 1e-8, 50);
    CHECK(run.fps_defined);
    CHECK(run.fps > 0.0);
    CHECK(run.gen_frames == 50);
}

TEST_CASE("gram heatmap: constant-distance frames give a uniform off-diagonal") {
    // frame l = 100 * e_l (one bright pixel per frame): pairwise squared
    // distances are all equal, so every off-diagonal entry matches
    const std::size_t n = 5;
    FrameSequence seq;
    for (std::size_t l = 0; l < n; ++l) {
        Frame f({n - 1, 1, 1}, 0.0);
        if (l < n - 1) f.data[l] = 100.0;
        seq.push_back(std::move(f));
    }
    const kernels::GramMatrix gram = harness::gram_of_sequence(seq, gaussian_auto());
    const double off = gram.values(0, 1);
    for (std::size_t i = 0; i < gram.n; ++i)
        for (std::size_t j = 0; j < gram.n; ++j)
            CHECK(gram.values(i, j) == doctest::Approx(i == j ? 1.0 : off).epsilon(1e-12));
}

TEST_CASE("gram heatmap autocorrelation peaks at the texture period") {
    harness::SyntheticSpec spec = sine_spec(60, 20);
    TempDir dir;
    const fs::path csv = dir.path / "gram.csv";
    const fs::path pgm = dir.path / "gram.pgm";
    const kernels::GramMatrix gram =
        harness::export_gram_heatmap(harness::make_synthetic(spec), gaussian_auto(), csv, pgm);

    // autocorrelation of the first Gram row (oracle: direct formula)
    const std::size_t n = gram.n;
    std::vector<double> row(n);
    for (std::size_t j = 0; j < n; ++j) row[j] = gram.values(0, j);
    double mean = 0.0;
    for (const double v : row) mean += v;
    mean /= static_cast<double>(n);
    std::size_t best_lag = 0;
    double best = -1e300;
    for (std::size_t lag = 1; lag <= n / 2; ++lag) {
        double acc = 0.0;
        for (std::size_t j = 0; j + lag < n; ++j)
            acc += (row[j] - mean) * (row[j + lag] - mean);
        acc /= static_cast<double>(n - lag);
        if (acc > best) {
            best = acc;
            best_lag = lag;
        }
    }
    CHECK(best_lag == 20);

    // CSV re-read equals the Gram bit-for-bit (%.17g round trip)
    std::ifstream in(csv);
    REQUIRE(in.good());
    std::string line;
    std::size_t i = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string cell;
        std::size_t j = 0;
        while (std::getline(ls, cell, ',')) {
            CHECK(std::stod(cell) == gram.values(i, j));
            ++j;
        }
        CHECK(j == n);
        ++i;
    }
    CHECK(i == n);

    // PGM exists and carries the n x n payload
    REQUIRE(fs::exists(pgm));
    const Frame img = frameio::load_image(pgm);
    CHECK(img.geom.width == n);
    CHECK(img.geom.height == n);
}
