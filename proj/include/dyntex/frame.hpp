#pragma once

#include <cstddef>
#include <vector>

#include "dyntex/error.hpp"

namespace dyntex {

struct Geometry {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1; // 1 (gray) or 3 (RGB, interleaved)

    std::size_t dim() const { return width * height * channels; }
    bool operator==(const Geometry&) const = default;
};

// One video frame as a flat row-major vector of 64-bit floats. Loaded
// frames hold intensities in [0, 255]; centered data may be negative and
// synthesized data may briefly leave the range (clamped only on save).
struct Frame {
    Geometry geom;
    std::vector<double> data;

    Frame() = default;
    explicit Frame(Geometry g, double fill = 0.0) : geom(g), data(g.dim(), fill) {}
    Frame(Geometry g, std::vector<double> values) : geom(g), data(std::move(values)) {
        if (data.size() != g.dim())
            throw DataError("Frame: data length does not match geometry");
    }

    double& at(std::size_t x, std::size_t y, std::size_t c = 0) {
        return data[(y * geom.width + x) * geom.channels + c];
    }
    double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
        return data[(y * geom.width + x) * geom.channels + c];
    }
};

// Ordered frames sharing one geometry.
class FrameSequence {
public:
    FrameSequence() = default;
    explicit FrameSequence(Geometry g) : geom_(g) {}

    void push_back(Frame f) {
        if (frames_.empty() && geom_ == Geometry{})
            geom_ = f.geom;
        if (!(f.geom == geom_))
            throw DataError("FrameSequence: mixed frame geometries");
        frames_.push_back(std::move(f));
    }

    std::size_t size() const { return frames_.size(); }
    bool empty() const { return frames_.empty(); }
    const Frame& operator[](std::size_t i) const { return frames_[i]; }
    Frame& operator[](std::size_t i) { return frames_[i]; }
    const Geometry& geometry() const { return geom_; }

    auto begin() const { return frames_.begin(); }
    auto end() const { return frames_.end(); }

private:
    Geometry geom_;
    std::vector<Frame> frames_;
};

} // namespace dyntex
