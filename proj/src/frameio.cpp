#include "dyntex/frameio.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <string>
#include <vector>

#include "dyntex/simd/vec_ops.hpp"

namespace dyntex::frameio {

namespace {

bool has_image_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".pgm" || ext == ".jpg" || ext == ".jpeg";
}

} // namespace

FrameSequence load_sequence(const std::filesystem::path& dir, const LoadOptions& options) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec))
        throw DataError("not a readable directory: " + dir.string());

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && has_image_extension(entry.path()))
            files.push_back(entry.path());
    }
    if (ec) throw DataError("not a readable directory: " + dir.string());
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
        return a.filename().string() < b.filename().string();
    });
    if (options.max_frames && files.size() > *options.max_frames)
        files.resize(*options.max_frames);
    if (files.size() < 2)
        throw DataError("fewer than 2 frames in " + dir.string());

    FrameSequence seq;
    for (const auto& file : files) {
        Frame frame = load_image(file, options);
        if (!seq.empty() && !(frame.geom == seq.geometry()))
            throw DataError("mixed geometries without resize: " + file.filename().string());
        seq.push_back(std::move(frame));
    }
    return seq;
}

std::size_t save_sequence(const FrameSequence& seq, const std::filesystem::path& dir,
                          ImageFormat format) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw DataError("cannot create output directory: " + dir.string());
    const char* ext = format == ImageFormat::png ? "png" : "pgm";
    for (std::size_t i = 0; i < seq.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%06zu.%s", i + 1, ext);
        save_image(seq[i], dir / name, format);
    }
    return seq.size();
}

CenteredSequence center(const FrameSequence& seq) {
    const std::size_t n = seq.size();
    if (n < 2) throw DataError("center: need at least 2 frames");
    const std::size_t d = seq.geometry().dim();

    CenteredSequence cs;
    cs.temporal_mean.assign(d, 0.0);
    for (const Frame& f : seq)
        simd::axpy(1.0, f.data.data(), cs.temporal_mean.data(), d);
    simd::scale(1.0 / static_cast<double>(n), cs.temporal_mean.data(), d);

    cs.centered = FrameSequence(seq.geometry());
    for (const Frame& f : seq) {
        Frame c = f;
        simd::axpy(-1.0, cs.temporal_mean.data(), c.data.data(), d);
        cs.centered.push_back(std::move(c));
    }
    return cs;
}

TrainingPair make_training_pair(const CenteredSequence& cs) {
    const std::size_t n = cs.centered.size();
    if (n < 2) throw DataError("make_training_pair: need at least 2 frames");
    const std::size_t d = cs.centered.geometry().dim();

    TrainingPair pair;
    pair.dim_d = d;
    pair.explanatory = DenseMatrix(n - 1, d);
    pair.response = DenseMatrix(n - 1, d);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::copy(cs.centered[i].data.begin(), cs.centered[i].data.end(),
                  pair.explanatory.row_ptr(i));
        std::copy(cs.centered[i + 1].data.begin(), cs.centered[i + 1].data.end(),
                  pair.response.row_ptr(i));
    }
    return pair;
}

} // namespace dyntex::frameio
