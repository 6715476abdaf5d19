#pragma once

#include <filesystem>

#include "dyntex/frame.hpp"
#include "dyntex/kernels.hpp"
#include "dyntex/matrix.hpp"

namespace dyntex::kse {

// Kernel similarity embedding regressor: one-step frame predictor
//   f(x) = [K(x, x_1) ... K(x, x_n)] (lambda*I + Omega)^{-1} Y
// trained on the centered explanatory/response split of one sequence.
// coefficients holds the precomputed (lambda*I + Omega)^{-1} Y. The final
// centered response frame is stored so the training system stays fully
// recheckable from the model file alone.
struct KseModel {
    kernels::KernelSpec kernel; // resolved (no auto parameters)
    double lambda = 0.0;
    DenseMatrix explanatory;           // (N-1) x D, centered frames 1..N-1
    DenseMatrix coefficients;          // (N-1) x D
    std::vector<double> temporal_mean; // D
    std::vector<double> final_response; // centered frame N
    Geometry geometry;
    double jitter_applied = 0.0;

    std::size_t pair_count() const { return explanatory.rows(); }
    std::size_t dim() const { return explanatory.cols(); }
};

struct SynthesisRequest {
    Frame seed;            // uncentered
    std::size_t count = 1; // frames to produce, seed included
};

// Smallest accepted ridge factor; exact interpolation (lambda = 0) is
// rejected.
inline constexpr double kMinLambda = 1e-15;

KseModel train(const FrameSequence& seq, const kernels::KernelSpec& kernel, double lambda);

// One-step prediction: center, kernel-weight the stored coefficient rows,
// un-center. Output is full precision, never clamped.
Frame predict_next(const KseModel& model, const Frame& frame);

// frame 1 = seed, frame l = predict_next(frame l-1). Deterministic.
FrameSequence synthesize(const KseModel& model, const SynthesisRequest& req);

// Reconstructs (uncentered) training frame k, 1-based; k = N recovers the
// final response frame. Default synthesis seed is training_frame(model, 1).
Frame training_frame(const KseModel& model, std::size_t k);

// "KSE1" little-endian container; bit-exact round trip.
std::size_t save_model(const KseModel& model, const std::filesystem::path& path);
KseModel load_model(const std::filesystem::path& path);

// Residual |(lambda*I + Omega) A - Y|_F / |Y|_F recomputed from stored
// state; cheap invariant check used by tests and load-time diagnostics.
double training_residual(const KseModel& model);

} // namespace dyntex::kse
