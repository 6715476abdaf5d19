#include "dyntex/baselines.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "dyntex/binio.hpp"
#include "dyntex/error.hpp"
#include "dyntex/frameio.hpp"
#include "dyntex/parallel.hpp"
#include "dyntex/simd/vec_ops.hpp"
#include "dyntex/solver.hpp"

namespace dyntex::baselines {

namespace {

bool all_frames_identical(const FrameSequence& seq) {
    for (std::size_t i = 1; i < seq.size(); ++i)
        if (seq[i].data != seq[0].data) return false;
    return true;
}

// Portable uniform [-1, 1]: top 53 bits of the engine output, so the
// stream does not depend on the library's distribution internals.
double uniform_pm1(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 4503599627370496.0) - 1.0;
}

double activate(Activation a, double z) {
    return a == Activation::sigmoid ? 1.0 / (1.0 + std::exp(-z)) : std::tanh(z);
}

} // namespace

const char* activation_name(Activation a) {
    return a == Activation::sigmoid ? "sigmoid" : "tanh";
}

Activation parse_activation(const std::string& name) {
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "tanh") return Activation::tanh;
    throw DataError("unknown activation '" + name + "' (expected sigmoid or tanh)");
}

ElmModel elm_train(const FrameSequence& seq, std::size_t t_nodes, double lambda,
                   std::uint64_t rng_seed, Activation activation) {
    if (seq.size() < 2) throw DataError("elm_train: need at least 2 frames");
    if (t_nodes < 1) throw DataError("elm_train: need at least 1 hidden node");
    if (!(lambda > 0.0)) throw DataError("elm_train: lambda must be > 0");
    if (all_frames_identical(seq)) throw DataError("degenerate sequence");

    frameio::CenteredSequence cs = frameio::center(seq);
    frameio::TrainingPair pair = frameio::make_training_pair(cs);
    const std::size_t d = pair.dim_d;
    const std::size_t n = pair.explanatory.rows();

    ElmModel model;
    model.activation = activation;
    model.rng_seed = rng_seed;
    model.lambda = lambda;
    model.geometry = seq.geometry();
    model.temporal_mean = std::move(cs.temporal_mean);

    // draw order: weights row-major, then biases
    std::mt19937_64 rng(rng_seed);
    model.input_weights = DenseMatrix(t_nodes, d);
    for (double& w : model.input_weights.data()) w = uniform_pm1(rng);
    model.biases.resize(t_nodes);
    for (double& b : model.biases) b = uniform_pm1(rng);

    DenseMatrix h(n, t_nodes);
    parallel_for(n, [&](std::size_t i) {
        const double* x = pair.explanatory.row_ptr(i);
        double* row = h.row_ptr(i);
        for (std::size_t t = 0; t < t_nodes; ++t) {
            const double z = simd::dot(model.input_weights.row_ptr(t), x, d) + model.biases[t];
            row[t] = activate(activation, z);
        }
    });

    model.beta = solver::pinv_solve(h, pair.response, lambda);
    return model;
}

Frame elm_predict(const ElmModel& model, const Frame& frame) {
    if (!(frame.geom == model.geometry))
        throw DataError("elm_predict: frame geometry does not match model");
    const std::size_t d = model.dim();
    const std::size_t t_nodes = model.hidden_nodes();
    std::vector<double> centered = frame.data;
    simd::axpy(-1.0, model.temporal_mean.data(), centered.data(), d);

    std::vector<double> h(t_nodes);
    parallel_for(t_nodes, [&](std::size_t t) {
        const double z =
            simd::dot(model.input_weights.row_ptr(t), centered.data(), d) + model.biases[t];
        h[t] = activate(model.activation, z);
    });

    Frame out(model.geometry);
    std::copy(model.temporal_mean.begin(), model.temporal_mean.end(), out.data.begin());
    for (std::size_t t = 0; t < t_nodes; ++t)
        simd::axpy(h[t], model.beta.row_ptr(t), out.data.data(), d);
    return out;
}

FrameSequence elm_synthesize(const ElmModel& model, const Frame& seed, std::size_t count) {
    if (count < 1) throw DataError("elm_synthesize: count must be >= 1");
    if (!(seed.geom == model.geometry))
        throw DataError("elm_synthesize: seed geometry does not match model");
    FrameSequence out(model.geometry);
    out.push_back(seed);
    for (std::size_t l = 1; l < count; ++l)
        out.push_back(elm_predict(model, out[l - 1]));
    return out;
}

LdsModel lds_train(const FrameSequence& seq, std::size_t state_dim) {
    const std::size_t n_frames = seq.size();
    if (n_frames < 2) throw DataError("lds_train: need at least 2 frames");
    if (state_dim < 1 || state_dim > n_frames - 1)
        throw DataError("lds_train: n out of range");
    if (all_frames_identical(seq)) throw DataError("degenerate sequence");

    frameio::CenteredSequence cs = frameio::center(seq);
    const std::size_t d = seq.geometry().dim();

    // centered frames as columns of a D x N matrix
    DenseMatrix m(d, n_frames);
    for (std::size_t l = 0; l < n_frames; ++l) {
        const std::vector<double>& f = cs.centered[l].data;
        for (std::size_t r = 0; r < d; ++r) m(r, l) = f[r];
    }

    const solver::SvdResult dec = solver::svd(m);

    LdsModel model;
    model.state_dim = state_dim;
    model.geometry = seq.geometry();
    model.temporal_mean = std::move(cs.temporal_mean);
    model.c_map = DenseMatrix(d, state_dim);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < state_dim; ++c) model.c_map(r, c) = dec.u(r, c);

    // states x_l = C^T centered_l, as columns of an n x N matrix
    const DenseMatrix states = solver::matmul_at(model.c_map, m);

    // transition A: least squares on X2 ~ A X1, solved in transposed form
    DenseMatrix h(n_frames - 1, state_dim);
    DenseMatrix y(n_frames - 1, state_dim);
    for (std::size_t l = 0; l + 1 < n_frames; ++l)
        for (std::size_t c = 0; c < state_dim; ++c) {
            h(l, c) = states(c, l);
            y(l, c) = states(c, l + 1);
        }
    DenseMatrix a_t;
    try {
        a_t = solver::pinv_solve(h, y, 0.0);
    } catch (const NumericError&) {
        a_t = solver::pinv_solve(h, y, 1e-12);
    }
    model.a_dyn = DenseMatrix(state_dim, state_dim);
    for (std::size_t r = 0; r < state_dim; ++r)
        for (std::size_t c = 0; c < state_dim; ++c) model.a_dyn(r, c) = a_t(c, r);

    model.x0.resize(state_dim);
    for (std::size_t c = 0; c < state_dim; ++c) model.x0[c] = states(c, 0);
    return model;
}

FrameSequence lds_synthesize(const LdsModel& model, std::size_t count) {
    if (count < 1) throw DataError("lds_synthesize: count must be >= 1");
    const std::size_t d = model.geometry.dim();
    const std::size_t n = model.state_dim;
    FrameSequence out(model.geometry);
    std::vector<double> x = model.x0;
    std::vector<double> next(n);
    for (std::size_t l = 0; l < count; ++l) {
        Frame frame(model.geometry);
        for (std::size_t r = 0; r < d; ++r)
            frame.data[r] = simd::dot(model.c_map.row_ptr(r), x.data(), n) +
                            model.temporal_mean[r];
        out.push_back(std::move(frame));
        if (l + 1 == count) break;
        for (std::size_t r = 0; r < n; ++r)
            next[r] = simd::dot(model.a_dyn.row_ptr(r), x.data(), n);
        x = next;
    }
    return out;
}

// ---- serialization ----

namespace {

constexpr std::uint32_t kVersion = 1;

void write_header(std::ostream& out, const char magic[4], const Geometry& g) {
    binio::write_bytes(out, magic, 4);
    binio::write_u32(out, kVersion);
    binio::write_u32(out, static_cast<std::uint32_t>(g.width));
    binio::write_u32(out, static_cast<std::uint32_t>(g.height));
    binio::write_u32(out, static_cast<std::uint32_t>(g.channels));
}

Geometry read_header(std::istream& in, const char magic[4], const char* kind) {
    char found[4] = {};
    binio::read_bytes(in, found, 4, "magic");
    if (std::memcmp(found, magic, 4) != 0)
        throw DataError(std::string("bad magic: not a ") + kind + " model file");
    const std::uint32_t version = binio::read_u32(in, "version");
    if (version != kVersion)
        throw DataError(std::string("unsupported ") + kind + " version " +
                        std::to_string(version));
    Geometry g;
    g.width = binio::read_u32(in, "width");
    g.height = binio::read_u32(in, "height");
    g.channels = binio::read_u32(in, "channels");
    return g;
}

} // namespace

std::size_t save_elm_model(const ElmModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_header(out, "ELM1", model.geometry);
    binio::write_u32(out, static_cast<std::uint32_t>(model.hidden_nodes()));
    binio::write_u32(out, static_cast<std::uint32_t>(model.dim()));
    binio::write_u32(out, model.activation == Activation::sigmoid ? 0u : 1u);
    binio::write_u64(out, model.rng_seed);
    binio::write_f64(out, model.lambda);
    binio::write_f64_array(out, model.temporal_mean.data(), model.temporal_mean.size());
    binio::write_f64_array(out, model.input_weights.data().data(),
                           model.input_weights.data().size());
    binio::write_f64_array(out, model.biases.data(), model.biases.size());
    binio::write_f64_array(out, model.beta.data().data(), model.beta.data().size());
    out.flush();
    if (!out) throw DataError("cannot write " + path.string());
    return static_cast<std::size_t>(out.tellp());
}

ElmModel load_elm_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    ElmModel model;
    model.geometry = read_header(in, "ELM1", "ELM1");
    const std::uint32_t t_nodes = binio::read_u32(in, "t_nodes");
    const std::uint32_t dim = binio::read_u32(in, "dim");
    if (model.geometry.dim() != dim)
        throw DataError("ELM1 model: dim does not match geometry");
    const std::uint32_t act = binio::read_u32(in, "activation");
    if (act > 1) throw DataError("ELM1 model: bad activation code");
    model.activation = act == 0 ? Activation::sigmoid : Activation::tanh;
    model.rng_seed = binio::read_u64(in, "rng_seed");
    model.lambda = binio::read_f64(in, "lambda");
    model.temporal_mean.resize(dim);
    binio::read_f64_array(in, model.temporal_mean.data(), dim, "temporal_mean");
    model.input_weights = DenseMatrix(t_nodes, dim);
    binio::read_f64_array(in, model.input_weights.data().data(),
                          static_cast<std::size_t>(t_nodes) * dim, "input_weights");
    model.biases.resize(t_nodes);
    binio::read_f64_array(in, model.biases.data(), t_nodes, "biases");
    model.beta = DenseMatrix(t_nodes, dim);
    binio::read_f64_array(in, model.beta.data().data(),
                          static_cast<std::size_t>(t_nodes) * dim, "beta");
    return model;
}

std::size_t save_lds_model(const LdsModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_header(out, "LDS1", model.geometry);
    binio::write_u32(out, static_cast<std::uint32_t>(model.state_dim));
    binio::write_u32(out, static_cast<std::uint32_t>(model.geometry.dim()));
    binio::write_f64_array(out, model.temporal_mean.data(), model.temporal_mean.size());
    binio::write_f64_array(out, model.c_map.data().data(), model.c_map.data().size());
    binio::write_f64_array(out, model.a_dyn.data().data(), model.a_dyn.data().size());
    binio::write_f64_array(out, model.x0.data(), model.x0.size());
    out.flush();
    if (!out) throw DataError("cannot write " + path.string());
    return static_cast<std::size_t>(out.tellp());
}

LdsModel load_lds_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    LdsModel model;
    model.geometry = read_header(in, "LDS1", "LDS1");
    model.state_dim = binio::read_u32(in, "state_dim");
    const std::uint32_t dim = binio::read_u32(in, "dim");
    if (model.geometry.dim() != dim)
        throw DataError("LDS1 model: dim does not match geometry");
    model.temporal_mean.resize(dim);
    binio::read_f64_array(in, model.temporal_mean.data(), dim, "temporal_mean");
    model.c_map = DenseMatrix(dim, model.state_dim);
    binio::read_f64_array(in, model.c_map.data().data(),
                          static_cast<std::size_t>(dim) * model.state_dim, "c_map");
    model.a_dyn = DenseMatrix(model.state_dim, model.state_dim);
    binio::read_f64_array(in, model.a_dyn.data().data(), model.state_dim * model.state_dim,
                          "a_dyn");
    model.x0.resize(model.state_dim);
    binio::read_f64_array(in, model.x0.data(), model.state_dim, "x0");
    return model;
}

} // namespace dyntex::baselines
