#include "dyntex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dyntex/parallel.hpp"
#include "dyntex/simd/vec_ops.hpp"

namespace dyntex::metrics {

namespace {

void check_geometry(const FrameSequence& a, const FrameSequence& b) {
    if (!(a.geometry() == b.geometry()))
        throw DataError("metrics: sequence geometries differ");
}

// 1-based inclusive compared range [start, end]; empty -> error.
std::pair<std::size_t, std::size_t> compared_range(const FrameSequence& observed,
                                                   const FrameSequence& generated,
                                                   std::size_t start_index) {
    if (start_index < 1) throw DataError("metrics: start_index must be >= 1");
    const std::size_t end = std::min(observed.size(), generated.size());
    if (start_index > end) throw DataError("metrics: empty comparison range");
    return {start_index, end};
}

double frame_mse(const Frame& a, const Frame& b) {
    const double s = simd::sqdist(a.data.data(), b.data.data(), a.data.size());
    return s / static_cast<double>(a.data.size());
}

// Valid-region separable Gaussian filter; out is (h-w+1) x (w-w+1).
void gaussian_filter_valid(const std::vector<double>& img, std::size_t w, std::size_t h,
                           const std::vector<double>& g, std::vector<double>& tmp,
                           std::vector<double>& out) {
    const std::size_t k = g.size();
    const std::size_t ow = w - k + 1;
    const std::size_t oh = h - k + 1;
    tmp.resize(h * ow);
    for (std::size_t y = 0; y < h; ++y) {
        const double* row = img.data() + y * w;
        double* dst = tmp.data() + y * ow;
        for (std::size_t x = 0; x < ow; ++x) dst[x] = simd::dot(row + x, g.data(), k);
    }
    out.resize(oh * ow);
    for (std::size_t y = 0; y < oh; ++y) {
        double* dst = out.data() + y * ow;
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) acc += g[i] * tmp[(y + i) * ow + x];
            dst[x] = acc;
        }
    }
}

double ssim_plane(const std::vector<double>& x, const std::vector<double>& y, std::size_t w,
                  std::size_t h, const SsimConfig& cfg, const std::vector<double>& g) {
    const std::size_t n = w * h;
    std::vector<double> xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    std::vector<double> tmp, mu_x, mu_y, m_xx, m_yy, m_xy;
    gaussian_filter_valid(x, w, h, g, tmp, mu_x);
    gaussian_filter_valid(y, w, h, g, tmp, mu_y);
    gaussian_filter_valid(xx, w, h, g, tmp, m_xx);
    gaussian_filter_valid(yy, w, h, g, tmp, m_yy);
    gaussian_filter_valid(xy, w, h, g, tmp, m_xy);

    double acc = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
        const double mx = mu_x[i];
        const double my = mu_y[i];
        const double var_x = m_xx[i] - mx * mx;
        const double var_y = m_yy[i] - my * my;
        const double cov = m_xy[i] - mx * my;
        acc += ((2.0 * mx * my + cfg.c1) * (2.0 * cov + cfg.c2)) /
               ((mx * mx + my * my + cfg.c1) * (var_x + var_y + cfg.c2));
    }
    return acc / static_cast<double>(mu_x.size());
}

std::vector<double> gaussian_window(std::size_t k, double sigma) {
    std::vector<double> g(k);
    const double c = (static_cast<double>(k) - 1.0) / 2.0;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double d = static_cast<double>(i) - c;
        g[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
        total += g[i];
    }
    for (double& v : g) v /= total;
    return g;
}

void validate_ssim_config(const SsimConfig& cfg) {
    if (cfg.c1 <= 0.0 || cfg.c2 <= 0.0)
        throw DataError("ssim: c1 and c2 must be positive");
    if (cfg.window < 3 || cfg.window % 2 == 0)
        throw DataError("ssim: window must be odd and >= 3");
    if (cfg.window_sigma <= 0.0) throw DataError("ssim: window_sigma must be positive");
}

} // namespace

std::pair<std::vector<double>, double> psnr_sequence(const FrameSequence& observed,
                                                     const FrameSequence& generated,
                                                     const PsnrConfig& cfg) {
    check_geometry(observed, generated);
    if (cfg.peak <= 0.0 || cfg.cap_db <= 0.0)
        throw DataError("psnr: peak and cap_db must be positive");
    const auto [start, end] = compared_range(observed, generated, cfg.start_index);
    std::vector<double> per_frame(end - start + 1);
    parallel_for(per_frame.size(), [&](std::size_t i) {
        const std::size_t l = start + i; // 1-based frame number
        const double mse = frame_mse(observed[l - 1], generated[l - 1]);
        per_frame[i] = mse == 0.0
                           ? cfg.cap_db
                           : std::min(10.0 * std::log10(cfg.peak * cfg.peak / mse), cfg.cap_db);
    });
    const double mean =
        simd::sum(per_frame.data(), per_frame.size()) / static_cast<double>(per_frame.size());
    return {std::move(per_frame), mean};
}

double ssim_frame(const Frame& x, const Frame& y, const SsimConfig& cfg) {
    if (!(x.geom == y.geom)) throw DataError("ssim: frame geometries differ");
    validate_ssim_config(cfg);
    const std::size_t w = x.geom.width;
    const std::size_t h = x.geom.height;
    if (w < cfg.window || h < cfg.window)
        throw DataError("ssim: frame smaller than the window");
    const std::vector<double> g = gaussian_window(cfg.window, cfg.window_sigma);

    const std::size_t ch = x.geom.channels;
    if (ch == 1) return ssim_plane(x.data, y.data, w, h, cfg, g);

    double acc = 0.0;
    std::vector<double> px(w * h), py(w * h);
    for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t i = 0; i < w * h; ++i) {
            px[i] = x.data[i * ch + c];
            py[i] = y.data[i * ch + c];
        }
        acc += ssim_plane(px, py, w, h, cfg, g);
    }
    return acc / static_cast<double>(ch);
}

std::pair<std::vector<double>, double> ssim_sequence(const FrameSequence& observed,
                                                     const FrameSequence& generated,
                                                     const SsimConfig& cfg) {
    check_geometry(observed, generated);
    const auto [start, end] = compared_range(observed, generated, cfg.start_index);
    std::vector<double> per_frame(end - start + 1);
    parallel_for(per_frame.size(), [&](std::size_t i) {
        const std::size_t l = start + i;
        per_frame[i] = ssim_frame(observed[l - 1], generated[l - 1], cfg);
    });
    const double mean =
        simd::sum(per_frame.data(), per_frame.size()) / static_cast<double>(per_frame.size());
    return {std::move(per_frame), mean};
}

MetricReport evaluate(const FrameSequence& observed, const FrameSequence& generated,
                      const PsnrConfig& pcfg, const SsimConfig& scfg) {
    if (pcfg.start_index != scfg.start_index)
        throw DataError("metrics: PSNR and SSIM start_index differ");
    MetricReport report;
    report.start_index = pcfg.start_index;
    auto [psnr, psnr_mean] = psnr_sequence(observed, generated, pcfg);
    auto [ssim, ssim_mean] = ssim_sequence(observed, generated, scfg);
    report.frames_compared = psnr.size();
    report.per_frame_psnr = std::move(psnr);
    report.per_frame_ssim = std::move(ssim);
    report.mean_psnr = psnr_mean;
    report.mean_ssim = ssim_mean;
    return report;
}

std::string to_csv(const MetricReport& report) {
    std::ostringstream out;
    char buf[96];
    out << "frame,psnr_db,ssim\n";
    for (std::size_t i = 0; i < report.frames_compared; ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f\n", report.start_index + i,
                      report.per_frame_psnr[i], report.per_frame_ssim[i]);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "mean,%.6f,%.6f\n", report.mean_psnr, report.mean_ssim);
    out << buf;
    return out.str();
}

void write_csv(const MetricReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << to_csv(report);
    if (!out) throw DataError("cannot write " + path.string());
}

} // namespace dyntex::metrics
