#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dyntex/frame.hpp"
#include "dyntex/kernels.hpp"
#include "dyntex/kse.hpp"
#include "dyntex/metrics.hpp"

namespace dyntex::harness {

// ---- synthetic ground-truth textures ----

enum class SyntheticPattern { translating_sine, rotating_phase, saturated_sine };

SyntheticPattern parse_pattern(const std::string& name);
const char* pattern_name(SyntheticPattern p);

// Deterministic test textures with an exact analytic continuation. All
// patterns repeat with the given period (bit-exactly when noise_amp = 0);
// saturated_sine pushes the phase through a saturating nonlinearity so
// low-rank linear models cannot capture it.
struct SyntheticSpec {
    SyntheticPattern pattern = SyntheticPattern::translating_sine;
    std::size_t width = 64;
    std::size_t height = 48;
    std::size_t period = 20; // frames
    std::size_t frames = 60;
    double noise_amp = 0.0;
    std::uint64_t rng_seed = 1;
};

// Noise-free analytic frame at any 1-based index; the ground truth for
// long-horizon scoring.
Frame synthetic_frame(const SyntheticSpec& spec, std::size_t index);

FrameSequence make_synthetic(const SyntheticSpec& spec);

// Analytic continuation frames first..first+count-1.
FrameSequence synthetic_continuation(const SyntheticSpec& spec, std::size_t first,
                                     std::size_t count);

// ---- (lambda, gamma) grid search ----

struct GridSpec {
    std::vector<double> lambdas;
    std::vector<double> gammas;
};

struct GridEntry {
    double lambda = 0.0;
    double gamma = 0.0;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    double train_seconds = 0.0;
};

struct GridResult {
    std::vector<GridEntry> entries; // lambda-major order
    std::pair<double, double> best_by_ssim{0.0, 0.0};
    std::pair<double, double> best_by_psnr{0.0, 0.0};
};

// For each (lambda, gamma): train a gaussian-kernel model on the first
// train_frames frames, synthesize train_frames + eval_frames frames from
// training frame 1, and score frames 2..train+eval against the observed
// sequence. Ties in the argmax go to the smallest lambda, then gamma.
GridResult run_grid(const FrameSequence& seq, const GridSpec& grid, std::size_t train_frames,
                    std::size_t eval_frames);

std::string grid_csv(const GridResult& result);
void write_grid_csv(const GridResult& result, const std::filesystem::path& path);

// ---- sustainability ----

struct Checkpoint {
    std::size_t frame = 0;       // 1-based synthesized frame index
    std::optional<double> ssim;  // empty when no observed frame exists
};

struct SustainabilityResult {
    metrics::MetricReport report; // vs available observed frames
    std::vector<Checkpoint> checkpoints; // every 100 frames up to horizon
    std::size_t observed_frames = 0;
    std::size_t horizon = 0;
};

SustainabilityResult run_sustainability(const FrameSequence& seq,
                                        const kernels::KernelSpec& kernel, double lambda,
                                        std::size_t train_frames, std::size_t horizon);

// ---- transfer / generalization matrix ----

struct TransferCell {
    bool failed = false;
    std::string error;
    FrameSequence synthesized;
    std::optional<metrics::MetricReport> report;
};

// Synthesizes count frames from every (model, seed) pair. observed may be
// empty or hold one (nullable) sequence per seed for scoring. A failing
// cell (e.g. geometry mismatch) is marked and the run continues.
std::vector<std::vector<TransferCell>> run_transfer(
    const std::vector<const kse::KseModel*>& models, const std::vector<Frame>& seeds,
    std::size_t count, const std::vector<const FrameSequence*>& observed = {});

// ---- timing ----

struct BenchResult {
    double train_seconds = 0.0;
    double synth_seconds = 0.0;
    double fps = 0.0;
    bool fps_defined = false; // false when gen_frames = 0
    std::size_t gen_frames = 0;
    std::size_t train_frames = 0;
    std::size_t dim = 0;
};

BenchResult run_bench(const FrameSequence& seq, const kernels::KernelSpec& kernel,
                      double lambda, std::size_t gen_frames);

// ---- Gram heatmap export ----

// Kernel similarity matrix of the sequence's centered explanatory frames.
kernels::GramMatrix gram_of_sequence(const FrameSequence& seq,
                                     const kernels::KernelSpec& kernel);

// Raw values as CSV (%.17g, round-trippable) and/or a min-max normalized
// P5 heatmap. Pass an empty path to skip either output.
kernels::GramMatrix export_gram_heatmap(const FrameSequence& seq,
                                        const kernels::KernelSpec& kernel,
                                        const std::filesystem::path& csv_path,
                                        const std::filesystem::path& pgm_path);

} // namespace dyntex::harness
