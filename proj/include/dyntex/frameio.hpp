#pragma once

#include <filesystem>
#include <optional>
#include <utility>

#include "dyntex/frame.hpp"
#include "dyntex/matrix.hpp"

namespace dyntex::frameio {

enum class ImageFormat { png, pgm };

struct LoadOptions {
    bool grayscale = false;
    std::optional<std::pair<std::size_t, std::size_t>> resize; // (width, height)
    std::optional<std::size_t> max_frames;
};

// Decodes one PNG/JPEG/PGM image (sniffed by signature); grayscale uses
// Rec. 601 luma, resize is bilinear. Conversion order: grayscale first,
// then resize.
Frame load_image(const std::filesystem::path& file, const LoadOptions& options = {});

// Writes one frame, clamping to [0, 255] and rounding to nearest. PGM
// output requires a single channel.
void save_image(const Frame& frame, const std::filesystem::path& file, ImageFormat format);

Frame to_grayscale(const Frame& frame);
Frame resize_bilinear(const Frame& frame, std::size_t width, std::size_t height);

// Loads every decodable image in dir, ordered by lexicographic filename.
// Requires at least two frames and a consistent geometry (after optional
// conversion/resize).
FrameSequence load_sequence(const std::filesystem::path& dir, const LoadOptions& options = {});

// Writes frames as frame_000001.<ext>, frame_000002.<ext>, ...; returns
// the number of files written.
std::size_t save_sequence(const FrameSequence& seq, const std::filesystem::path& dir,
                          ImageFormat format);

struct CenteredSequence {
    FrameSequence centered;            // mean-removed frames (values may be negative)
    std::vector<double> temporal_mean; // per-pixel average over the sequence
};

CenteredSequence center(const FrameSequence& seq);

// Explanatory rows = centered frames 1..N-1, response rows = 2..N.
struct TrainingPair {
    DenseMatrix explanatory;
    DenseMatrix response;
    std::size_t dim_d = 0;
};

TrainingPair make_training_pair(const CenteredSequence& cs);

} // namespace dyntex::frameio
