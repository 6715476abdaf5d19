#include "dyntex/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "dyntex/error.hpp"
#include "dyntex/frameio.hpp"

namespace dyntex::harness {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

double pattern_value(SyntheticPattern pattern, double phase, double theta) {
    switch (pattern) {
        case SyntheticPattern::translating_sine:
            return 127.5 + 100.0 * std::sin(theta - phase);
        case SyntheticPattern::rotating_phase:
            // rank-2 in pixel space: cos/sin mixture of two fixed patterns
            return 127.5 + 60.0 * (std::cos(phase) * std::sin(theta) +
                                   std::sin(phase) * std::cos(theta));
        case SyntheticPattern::saturated_sine:
            // two phase harmonics pushed through a hard saturation: the
            // cycle's linear rank grows with the period, defeating
            // low-dimensional linear observers while staying periodic
            return 127.5 + 120.0 * std::tanh(1.8 * std::sin(theta - phase) +
                                             1.4 * std::sin(2.0 * theta + 0.7 - 2.0 * phase));
    }
    throw DataError("unknown synthetic pattern");
}

void validate_spec(const SyntheticSpec& spec) {
    if (spec.width < 1 || spec.height < 1)
        throw DataError("synthetic: width and height must be >= 1");
    if (spec.period < 2) throw DataError("synthetic: period must be >= 2");
    if (spec.frames < spec.period)
        throw DataError("synthetic: frames must be >= period");
    if (spec.noise_amp < 0.0) throw DataError("synthetic: noise_amp must be >= 0");
}

double uniform_pm1(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 4503599627370496.0) - 1.0;
}

} // namespace

SyntheticPattern parse_pattern(const std::string& name) {
    if (name == "translating_sine") return SyntheticPattern::translating_sine;
    if (name == "rotating_phase") return SyntheticPattern::rotating_phase;
    if (name == "saturated_sine") return SyntheticPattern::saturated_sine;
    throw DataError("unknown synthetic pattern '" + name + "'");
}

const char* pattern_name(SyntheticPattern p) {
    switch (p) {
        case SyntheticPattern::translating_sine: return "translating_sine";
        case SyntheticPattern::rotating_phase: return "rotating_phase";
        case SyntheticPattern::saturated_sine: return "saturated_sine";
    }
    return "?";
}

Frame synthetic_frame(const SyntheticSpec& spec, std::size_t index) {
    validate_spec(spec);
    if (index < 1) throw DataError("synthetic: frame index is 1-based");
    // integer modulus first, so frame l and frame l + period match bit-exactly
    const std::size_t step = (index - 1) % spec.period;
    const double phase =
        2.0 * std::numbers::pi * static_cast<double>(step) / static_cast<double>(spec.period);
    Frame frame({spec.width, spec.height, 1});
    for (std::size_t y = 0; y < spec.height; ++y) {
        const double ty = static_cast<double>(y) / static_cast<double>(spec.height);
        for (std::size_t x = 0; x < spec.width; ++x) {
            const double tx = static_cast<double>(x) / static_cast<double>(spec.width);
            const double theta = 2.0 * std::numbers::pi * (2.0 * tx + ty);
            frame.at(x, y) = pattern_value(spec.pattern, phase, theta);
        }
    }
    return frame;
}

FrameSequence make_synthetic(const SyntheticSpec& spec) {
    validate_spec(spec);
    FrameSequence seq({spec.width, spec.height, 1});
    std::mt19937_64 rng(spec.rng_seed);
    for (std::size_t l = 1; l <= spec.frames; ++l) {
        Frame frame = synthetic_frame(spec, l);
        if (spec.noise_amp > 0.0) {
            for (double& v : frame.data)
                v = std::clamp(v + spec.noise_amp * uniform_pm1(rng), 0.0, 255.0);
        }
        seq.push_back(std::move(frame));
    }
    return seq;
}

FrameSequence synthetic_continuation(const SyntheticSpec& spec, std::size_t first,
                                     std::size_t count) {
    FrameSequence seq({spec.width, spec.height, 1});
    for (std::size_t i = 0; i < count; ++i)
        seq.push_back(synthetic_frame(spec, first + i));
    return seq;
}

namespace {

FrameSequence head(const FrameSequence& seq, std::size_t count) {
    FrameSequence out(seq.geometry());
    for (std::size_t i = 0; i < count; ++i) out.push_back(seq[i]);
    return out;
}

} // namespace

GridResult run_grid(const FrameSequence& seq, const GridSpec& grid, std::size_t train_frames,
                    std::size_t eval_frames) {
    if (grid.lambdas.empty() || grid.gammas.empty())
        throw DataError("run_grid: lambda and gamma lists must be non-empty");
    for (const double v : grid.lambdas)
        if (!(v > 0.0)) throw DataError("run_grid: lambdas must be positive");
    for (const double v : grid.gammas)
        if (!(v > 0.0)) throw DataError("run_grid: gammas must be positive");
    if (train_frames < 2) throw DataError("run_grid: need at least 2 training frames");
    if (train_frames + eval_frames > seq.size())
        throw DataError("run_grid: insufficient frames for train + eval split");

    const FrameSequence train_seq = head(seq, train_frames);
    const FrameSequence observed = head(seq, train_frames + eval_frames);
    const std::size_t synth_count = train_frames + eval_frames;

    GridResult result;
    result.entries.reserve(grid.lambdas.size() * grid.gammas.size());
    for (const double lambda : grid.lambdas) {
        for (const double gamma : grid.gammas) {
            kernels::KernelSpec spec;
            spec.family = kernels::KernelFamily::gaussian;
            spec.gamma = gamma;

            GridEntry entry;
            entry.lambda = lambda;
            entry.gamma = gamma;
            const double t0 = now_seconds();
            const kse::KseModel model = kse::train(train_seq, spec, lambda);
            entry.train_seconds = now_seconds() - t0;

            const FrameSequence synth =
                kse::synthesize(model, {kse::training_frame(model, 1), synth_count});
            const metrics::MetricReport report = metrics::evaluate(observed, synth);
            entry.mean_psnr = report.mean_psnr;
            entry.mean_ssim = report.mean_ssim;
            result.entries.push_back(entry);
        }
    }

    auto better = [](double score, double lambda, double gamma, double best_score,
                     const std::pair<double, double>& best) {
        if (score != best_score) return score > best_score;
        if (lambda != best.first) return lambda < best.first;
        return gamma < best.second;
    };
    double best_ssim = -1e300;
    double best_psnr = -1e300;
    for (const GridEntry& e : result.entries) {
        if (better(e.mean_ssim, e.lambda, e.gamma, best_ssim, result.best_by_ssim)) {
            best_ssim = e.mean_ssim;
            result.best_by_ssim = {e.lambda, e.gamma};
        }
        if (better(e.mean_psnr, e.lambda, e.gamma, best_psnr, result.best_by_psnr)) {
            best_psnr = e.mean_psnr;
            result.best_by_psnr = {e.lambda, e.gamma};
        }
    }
    return result;
}

std::string grid_csv(const GridResult& result) {
    std::ostringstream out;
    char buf[160];
    out << "lambda,gamma,mean_psnr,mean_ssim,train_seconds\n";
    for (const GridEntry& e : result.entries) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.6f,%.6f,%.6f\n", e.lambda, e.gamma,
                      e.mean_psnr, e.mean_ssim, e.train_seconds);
        out << buf;
    }
    return out.str();
}

void write_grid_csv(const GridResult& result, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << grid_csv(result);
    if (!out) throw DataError("cannot write " + path.string());
}

SustainabilityResult run_sustainability(const FrameSequence& seq,
                                        const kernels::KernelSpec& kernel, double lambda,
                                        std::size_t train_frames, std::size_t horizon) {
    if (train_frames < 2 || train_frames > seq.size())
        throw DataError("run_sustainability: insufficient frames");
    if (horizon < train_frames)
        throw DataError("run_sustainability: horizon must be >= train_frames");

    const kse::KseModel model = kse::train(head(seq, train_frames), kernel, lambda);
    const FrameSequence synth =
        kse::synthesize(model, {kse::training_frame(model, 1), horizon});

    SustainabilityResult result;
    result.horizon = horizon;
    result.observed_frames = std::min(seq.size(), horizon);
    result.report = metrics::evaluate(head(seq, result.observed_frames),
                                      head(synth, result.observed_frames));
    for (std::size_t f = 100; f <= horizon; f += 100) {
        Checkpoint cp;
        cp.frame = f;
        if (f >= result.report.start_index &&
            f < result.report.start_index + result.report.frames_compared)
            cp.ssim = result.report.per_frame_ssim[f - result.report.start_index];
        result.checkpoints.push_back(cp);
    }
    return result;
}

std::vector<std::vector<TransferCell>> run_transfer(
    const std::vector<const kse::KseModel*>& models, const std::vector<Frame>& seeds,
    std::size_t count, const std::vector<const FrameSequence*>& observed) {
    if (!observed.empty() && observed.size() != seeds.size())
        throw DataError("run_transfer: observed list must match seeds");
    std::vector<std::vector<TransferCell>> grid(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        grid[i].resize(seeds.size());
        for (std::size_t j = 0; j < seeds.size(); ++j) {
            TransferCell& cell = grid[i][j];
            try {
                cell.synthesized = kse::synthesize(*models[i], {seeds[j], count});
                if (!observed.empty() && observed[j] != nullptr)
                    cell.report = metrics::evaluate(*observed[j], cell.synthesized);
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
            }
        }
    }
    return grid;
}

BenchResult run_bench(const FrameSequence& seq, const kernels::KernelSpec& kernel,
                      double lambda, std::size_t gen_frames) {
    BenchResult result;
    result.gen_frames = gen_frames;
    result.train_frames = seq.size();
    result.dim = seq.geometry().dim();

    const double t0 = now_seconds();
    const kse::KseModel model = kse::train(seq, kernel, lambda);
    result.train_seconds = now_seconds() - t0;

    if (gen_frames > 0) {
        const Frame seed = kse::training_frame(model, 1);
        const double t1 = now_seconds();
        const FrameSequence synth = kse::synthesize(model, {seed, gen_frames});
        result.synth_seconds = now_seconds() - t1;
        if (result.synth_seconds > 0.0) {
            result.fps = static_cast<double>(gen_frames) / result.synth_seconds;
            result.fps_defined = true;
        }
    }
    return result;
}

kernels::GramMatrix gram_of_sequence(const FrameSequence& seq,
                                     const kernels::KernelSpec& kernel) {
    frameio::CenteredSequence cs = frameio::center(seq);
    frameio::TrainingPair pair = frameio::make_training_pair(cs);
    const kernels::KernelSpec resolved = kernels::resolve(kernel, pair.explanatory);
    return kernels::gram_matrix(pair.explanatory, resolved);
}

kernels::GramMatrix export_gram_heatmap(const FrameSequence& seq,
                                        const kernels::KernelSpec& kernel,
                                        const std::filesystem::path& csv_path,
                                        const std::filesystem::path& pgm_path) {
    kernels::GramMatrix gram = gram_of_sequence(seq, kernel);
    const std::size_t n = gram.n;

    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) throw DataError("cannot write " + csv_path.string());
        char buf[40];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", gram.values(i, j));
                out << buf << (j + 1 < n ? "," : "\n");
            }
        }
        if (!out) throw DataError("cannot write " + csv_path.string());
    }

    if (!pgm_path.empty()) {
        const auto [lo_it, hi_it] =
            std::minmax_element(gram.values.data().begin(), gram.values.data().end());
        const double lo = *lo_it;
        const double span = *hi_it - lo;
        Frame img({n, n, 1});
        for (std::size_t i = 0; i < gram.values.data().size(); ++i)
            img.data[i] = span > 0.0 ? 255.0 * (gram.values.data()[i] - lo) / span : 0.0;
        frameio::save_image(img, pgm_path, frameio::ImageFormat::pgm);
    }
    return gram;
}

} // namespace dyntex::harness
