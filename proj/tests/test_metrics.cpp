#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dyntex/metrics.hpp"

using namespace dyntex;

namespace {

// Direct double-loop SSIM: full 2D Gaussian window at every valid
// position, no separability tricks. Independent of the library path.
double ssim_oracle(const Frame& x, const Frame& y, const metrics::SsimConfig& cfg) {
    const std::size_t k = cfg.window;
    const std::size_t w = x.geom.width;
    const std::size_t h = x.geom.height;
    std::vector<double> win(k * k);
    const double c = (static_cast<double>(k) - 1.0) / 2.0;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double di = static_cast<double>(i) - c;
            const double dj = static_cast<double>(j) - c;
            win[i * k + j] =
                std::exp(-(di * di + dj * dj) / (2.0 * cfg.window_sigma * cfg.window_sigma));
            total += win[i * k + j];
        }
    for (double& v : win) v /= total;

    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t oy = 0; oy + k <= h; ++oy) {
        for (std::size_t ox = 0; ox + k <= w; ++ox) {
            double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) {
                    const double wv = win[i * k + j];
                    const double xv = x.at(ox + j, oy + i);
                    const double yv = y.at(ox + j, oy + i);
                    mx += wv * xv;
                    my += wv * yv;
                    mxx += wv * xv * xv;
                    myy += wv * yv * yv;
                    mxy += wv * xv * yv;
                }
            const double vx = mxx - mx * mx;
            const double vy = myy - my * my;
            const double cov = mxy - mx * my;
            acc += ((2 * mx * my + cfg.c1) * (2 * cov + cfg.c2)) /
                   ((mx * mx + my * my + cfg.c1) * (vx + vy + cfg.c2));
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

Frame pattern_frame(std::size_t w, std::size_t h, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 255.0);
    Frame f({w, h, 1});
    for (double& v : f.data) v = dist(rng);
    return f;
}

FrameSequence constant_sequence(std::size_t n, std::size_t w, std::size_t h, double value) {
    FrameSequence seq;
    for (std::size_t i = 0; i < n; ++i) seq.push_back(Frame({w, h, 1}, value));
    return seq;
}

} // namespace

TEST_CASE("identical sequences hit the PSNR cap on every frame") {
    FrameSequence seq;
    for (unsigned i = 0; i < 4; ++i) seq.push_back(pattern_frame(12, 12, i));
    const auto [per_frame, mean] = metrics::psnr_sequence(seq, seq);
    REQUIRE(per_frame.size() == 3); // frames 2..4
    for (const double v : per_frame) CHECK(v == 100.0);
    CHECK(mean == 100.0);
}

TEST_CASE("uniform differences give the closed-form PSNR") {
    const std::size_t w = 8, h = 8;
    // difference 255 everywhere -> MSE = 65025 -> 0 dB
    {
        FrameSequence a = constant_sequence(3, w, h, 255.0);
        FrameSequence b = constant_sequence(3, w, h, 0.0);
        const auto [per_frame, mean] = metrics::psnr_sequence(a, b);
        for (const double v : per_frame) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
    }
    // difference 16 -> MSE = 256 -> 10 log10(65025/256) = 24.0494...
    {
        FrameSequence a = constant_sequence(3, w, h, 100.0);
        FrameSequence b = constant_sequence(3, w, h, 116.0);
        const auto [per_frame, mean] = metrics::psnr_sequence(a, b);
        const double want = 10.0 * std::log10(65025.0 / 256.0);
        CHECK(mean == doctest::Approx(want).epsilon(1e-12));
        CHECK(std::abs(mean - 24.0494) < 1e-3);
    }
}

TEST_CASE("PSNR is symmetric and shift-robust") {
    FrameSequence a, b;
    for (unsigned i = 0; i < 3; ++i) {
        a.push_back(pattern_frame(10, 10, i));
        b.push_back(pattern_frame(10, 10, 100 + i));
    }
    const auto [pa, ma] = metrics::psnr_sequence(a, b);
    const auto [pb, mb] = metrics::psnr_sequence(b, a);
    CHECK(pa == pb);
    CHECK(ma == mb);

    // adding the same constant to both leaves MSE untouched
    FrameSequence a2 = a, b2 = b;
    for (std::size_t l = 0; l < 3; ++l) {
        for (double& v : a2[l].data) v += 0.125;
        for (double& v : b2[l].data) v += 0.125;
    }
    const auto [ps, ms] = metrics::psnr_sequence(a2, b2);
    for (std::size_t i = 0; i < ps.size(); ++i) CHECK(ps[i] == doctest::Approx(pa[i]));
    CHECK(ms == doctest::Approx(ma));
}

TEST_CASE("PSNR validation errors") {
    FrameSequence a = constant_sequence(3, 8, 8, 1.0);
    FrameSequence b = constant_sequence(3, 9, 8, 1.0);
    CHECK_THROWS_AS(static_cast<void>(metrics::psnr_sequence(a, b)), DataError);

    FrameSequence one = constant_sequence(1, 8, 8, 1.0);
    CHECK_THROWS_AS(static_cast<void>(metrics::psnr_sequence(one, one)), DataError);
}

TEST_CASE("SSIM of a frame with itself is 1") {
    const Frame f = pattern_frame(16, 16, 7);
    CHECK(std::abs(metrics::ssim_frame(f, f) - 1.0) <= 1e-12);
    // constant frames: sigma terms vanish, means equal -> exactly 1
    const Frame c1({16, 16, 1}, 42.0);
    const Frame c2({16, 16, 1}, 42.0);
    CHECK(std::abs(metrics::ssim_frame(c1, c2) - 1.0) <= 1e-12);
}

TEST_CASE("SSIM matches the naive sliding-window oracle") {
    const metrics::SsimConfig cfg;
    for (unsigned seed = 0; seed < 4; ++seed) {
        const Frame x = pattern_frame(16, 16, seed);
        const Frame y = pattern_frame(16, 16, seed + 100);
        const double got = metrics::ssim_frame(x, y, cfg);
        const double want = ssim_oracle(x, y, cfg);
        CHECK(std::abs(got - want) < 1e-9);
    }
    // non-default window
    metrics::SsimConfig small = cfg;
    small.window = 7;
    small.window_sigma = 2.0;
    const Frame x = pattern_frame(20, 13, 5);
    const Frame y = pattern_frame(20, 13, 6);
    CHECK(std::abs(metrics::ssim_frame(x, y, small) - ssim_oracle(x, y, small)) < 1e-9);
}

TEST_CASE("SSIM is symmetric and bounded") {
    for (unsigned seed = 0; seed < 5; ++seed) {
        const Frame x = pattern_frame(14, 18, seed);
        const Frame y = pattern_frame(14, 18, seed + 50);
        const double xy = metrics::ssim_frame(x, y);
        const double yx = metrics::ssim_frame(y, x);
        CHECK(std::abs(xy - yx) <= 1e-12);
        CHECK(xy >= -1.0);
        CHECK(xy <= 1.0);
    }
}

TEST_CASE("contrast reduction strictly lowers SSIM") {
    const Frame x = pattern_frame(16, 16, 11);
    Frame y = x;
    const double mean = 127.5;
    for (double& v : y.data) v = mean + 0.5 * (v - mean);
    CHECK(metrics::ssim_frame(x, y) < metrics::ssim_frame(x, x));
}

TEST_CASE("inverted high-variance frames have negative mean SSIM") {
    FrameSequence a, b;
    for (unsigned i = 0; i < 4; ++i) {
        // high-contrast checkerboard-ish pattern, then its inversion
        Frame f({16, 16, 1});
        for (std::size_t y = 0; y < 16; ++y)
            for (std::size_t x = 0; x < 16; ++x)
                f.at(x, y) = ((x / 2 + y / 2 + i) % 2) ? 250.0 : 5.0;
        Frame inv = f;
        for (double& v : inv.data) v = 255.0 - v;
        a.push_back(std::move(f));
        b.push_back(std::move(inv));
    }
    const auto [per_frame, mean] = metrics::ssim_sequence(a, b);
    CHECK(mean < 0.0);
}

TEST_CASE("color SSIM averages the channels") {
    Frame x({16, 16, 3});
    Frame y({16, 16, 3});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(0.0, 255.0);
    for (double& v : x.data) v = dist(rng);
    for (double& v : y.data) v = dist(rng);

    double want = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        Frame px({16, 16, 1}), py({16, 16, 1});
        for (std::size_t i = 0; i < 256; ++i) {
            px.data[i] = x.data[i * 3 + c];
            py.data[i] = y.data[i * 3 + c];
        }
        want += metrics::ssim_frame(px, py);
    }
    CHECK(metrics::ssim_frame(x, y) == doctest::Approx(want / 3.0).epsilon(1e-12));
}

TEST_CASE("sequence means are the arithmetic means of the per-frame vectors") {
    FrameSequence a, b;
    for (unsigned i = 0; i < 5; ++i) {
        a.push_back(pattern_frame(16, 12, i));
        b.push_back(pattern_frame(16, 12, i + 9));
    }
    const metrics::MetricReport report = metrics::evaluate(a, b);
    CHECK(report.frames_compared == 4);
    double acc = 0.0;
    for (const double v : report.per_frame_ssim) acc += v;
    CHECK(report.mean_ssim == doctest::Approx(acc / 4.0).epsilon(1e-12));
    acc = 0.0;
    for (const double v : report.per_frame_psnr) acc += v;
    CHECK(report.mean_psnr == doctest::Approx(acc / 4.0).epsilon(1e-12));

    // identical sequences: mean SSIM exactly 1
    const auto [pf, mean] = metrics::ssim_sequence(a, a);
    CHECK(mean == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("CSV export has one row per compared frame plus a mean row") {
    FrameSequence a, b;
    for (unsigned i = 0; i < 4; ++i) {
        a.push_back(pattern_frame(12, 12, i));
        b.push_back(pattern_frame(12, 12, i + 20));
    }
    const metrics::MetricReport report = metrics::evaluate(a, b);
    std::istringstream csv(metrics::to_csv(report));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "frame,psnr_db,ssim");
    std::size_t rows = 0;
    std::string first;
    while (std::getline(csv, line)) {
        if (rows == 0) first = line;
        ++rows;
    }
    CHECK(rows == report.frames_compared + 1);
    CHECK(first.substr(0, 2) == "2,"); // comparison starts at frame 2
}

TEST_CASE("frames smaller than the window are rejected") {
    const Frame tiny({4, 4, 1}, 1.0);
    CHECK_THROWS_AS(static_cast<void>(metrics::ssim_frame(tiny, tiny)), DataError);
    metrics::SsimConfig bad;
    bad.window = 4;
    const Frame ok = pattern_frame(16, 16, 0);
    CHECK_THROWS_AS(static_cast<void>(metrics::ssim_frame(ok, ok, bad)), DataError);
}
