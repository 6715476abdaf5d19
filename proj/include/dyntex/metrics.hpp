#pragma once

#include <filesystem>
#include <vector>

#include "dyntex/frame.hpp"

namespace dyntex::metrics {

struct PsnrConfig {
    double peak = 255.0;
    double cap_db = 100.0;       // score for zero-MSE frames (and upper cap)
    std::size_t start_index = 2; // 1-based first compared frame
};

struct SsimConfig {
    double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    std::size_t window = 11; // odd, >= 3
    double window_sigma = 1.5;
    std::size_t start_index = 2;
};

struct MetricReport {
    std::vector<double> per_frame_psnr;
    std::vector<double> per_frame_ssim;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    std::size_t frames_compared = 0;
    std::size_t start_index = 2; // frame number of per_frame[0]
};

// Per-frame PSNR over frames start_index..min(len(observed), len(generated)),
// 10*log10(peak^2 / MSE) capped at cap_db; zero-MSE frames score cap_db.
std::pair<std::vector<double>, double> psnr_sequence(const FrameSequence& observed,
                                                     const FrameSequence& generated,
                                                     const PsnrConfig& cfg = {});

// Windowed SSIM with a Gaussian window, averaged over all positions where
// the window fully fits. Multi-channel frames score the mean of per-channel
// SSIM.
double ssim_frame(const Frame& x, const Frame& y, const SsimConfig& cfg = {});

std::pair<std::vector<double>, double> ssim_sequence(const FrameSequence& observed,
                                                     const FrameSequence& generated,
                                                     const SsimConfig& cfg = {});

// Both metrics over the shared compared range.
MetricReport evaluate(const FrameSequence& observed, const FrameSequence& generated,
                      const PsnrConfig& pcfg = {}, const SsimConfig& scfg = {});

// CSV rows `frame,psnr_db,ssim` for each compared frame, then a mean row;
// 6 decimal places.
void write_csv(const MetricReport& report, const std::filesystem::path& path);
std::string to_csv(const MetricReport& report);

} // namespace dyntex::metrics
