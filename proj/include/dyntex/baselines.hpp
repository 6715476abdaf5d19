#pragma once

#include <cstdint>
#include <filesystem>

#include "dyntex/frame.hpp"
#include "dyntex/matrix.hpp"

namespace dyntex::baselines {

enum class Activation { sigmoid, tanh };

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

// Random-feature ELM regressor: fixed random hidden layer
// h(x) = act(W x + b), ridge least-squares output weights beta.
// input_weights and biases are reproducible bit-for-bit from rng_seed.
struct ElmModel {
    DenseMatrix input_weights; // T x D
    std::vector<double> biases; // T
    Activation activation = Activation::sigmoid;
    DenseMatrix beta; // T x D
    std::vector<double> temporal_mean;
    std::uint64_t rng_seed = 0;
    double lambda = 0.0;
    Geometry geometry;

    std::size_t hidden_nodes() const { return input_weights.rows(); }
    std::size_t dim() const { return input_weights.cols(); }
};

ElmModel elm_train(const FrameSequence& seq, std::size_t t_nodes, double lambda,
                   std::uint64_t rng_seed, Activation activation = Activation::sigmoid);
Frame elm_predict(const ElmModel& model, const Frame& frame);
FrameSequence elm_synthesize(const ElmModel& model, const Frame& seed, std::size_t count);

// Linear dynamical system baseline: SVD observation map C (orthonormal
// columns), least-squares state transition A, deterministic rollout from
// the first training state.
struct LdsModel {
    DenseMatrix c_map; // D x n
    DenseMatrix a_dyn; // n x n
    std::vector<double> x0; // n
    std::vector<double> temporal_mean;
    std::size_t state_dim = 0;
    Geometry geometry;
};

LdsModel lds_train(const FrameSequence& seq, std::size_t state_dim);
FrameSequence lds_synthesize(const LdsModel& model, std::size_t count);

// "ELM1" / "LDS1" containers, same conventions as the KSE1 format.
std::size_t save_elm_model(const ElmModel& model, const std::filesystem::path& path);
ElmModel load_elm_model(const std::filesystem::path& path);
std::size_t save_lds_model(const LdsModel& model, const std::filesystem::path& path);
LdsModel load_lds_model(const std::filesystem::path& path);

} // namespace dyntex::baselines
