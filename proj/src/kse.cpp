#include "dyntex/kse.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "dyntex/binio.hpp"
#include "dyntex/frameio.hpp"
#include "dyntex/simd/vec_ops.hpp"
#include "dyntex/solver.hpp"

namespace dyntex::kse {

namespace {

constexpr char kMagic[4] = {'K', 'S', 'E', '1'};
constexpr std::uint32_t kVersion = 1;

bool all_frames_identical(const FrameSequence& seq) {
    for (std::size_t i = 1; i < seq.size(); ++i)
        if (seq[i].data != seq[0].data) return false;
    return true;
}

} // namespace

KseModel train(const FrameSequence& seq, const kernels::KernelSpec& kernel, double lambda) {
    if (seq.size() < 2) throw DataError("train: need at least 2 frames");
    if (!(lambda >= kMinLambda))
        throw DataError("train: lambda must be >= 1e-15 (exact interpolation is rejected)");
    if (all_frames_identical(seq)) throw DataError("degenerate sequence");

    frameio::CenteredSequence cs = frameio::center(seq);
    frameio::TrainingPair pair = frameio::make_training_pair(cs);

    KseModel model;
    model.kernel = kernels::resolve(kernel, pair.explanatory);
    model.lambda = lambda;
    model.geometry = seq.geometry();
    model.temporal_mean = std::move(cs.temporal_mean);

    const kernels::GramMatrix omega = kernels::gram_matrix(pair.explanatory, model.kernel);
    model.coefficients =
        solver::spd_solve(omega.values, lambda, pair.response, &model.jitter_applied);

    const std::size_t d = pair.dim_d;
    model.final_response.assign(pair.response.row_ptr(pair.response.rows() - 1),
                                pair.response.row_ptr(pair.response.rows() - 1) + d);
    model.explanatory = std::move(pair.explanatory);
    return model;
}

Frame predict_next(const KseModel& model, const Frame& frame) {
    if (!(frame.geom == model.geometry))
        throw DataError("predict_next: frame geometry does not match model");
    const std::size_t d = model.dim();
    std::vector<double> centered = frame.data;
    simd::axpy(-1.0, model.temporal_mean.data(), centered.data(), d);

    const std::vector<double> k = kernels::kernel_vector(centered, model.explanatory, model.kernel);

    Frame out(model.geometry);
    std::copy(model.temporal_mean.begin(), model.temporal_mean.end(), out.data.begin());
    for (std::size_t i = 0; i < k.size(); ++i)
        simd::axpy(k[i], model.coefficients.row_ptr(i), out.data.data(), d);
    return out;
}

FrameSequence synthesize(const KseModel& model, const SynthesisRequest& req) {
    if (req.count < 1) throw DataError("synthesize: count must be >= 1");
    if (!(req.seed.geom == model.geometry))
        throw DataError("synthesize: seed geometry does not match model");
    FrameSequence out(model.geometry);
    out.push_back(req.seed);
    for (std::size_t l = 1; l < req.count; ++l)
        out.push_back(predict_next(model, out[l - 1]));
    return out;
}

Frame training_frame(const KseModel& model, std::size_t k) {
    const std::size_t n = model.pair_count();
    if (k < 1 || k > n + 1)
        throw DataError("training_frame: index out of range");
    Frame out(model.geometry);
    const double* centered =
        k <= n ? model.explanatory.row_ptr(k - 1) : model.final_response.data();
    for (std::size_t j = 0; j < model.dim(); ++j)
        out.data[j] = centered[j] + model.temporal_mean[j];
    return out;
}

std::size_t save_model(const KseModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    binio::write_bytes(out, kMagic, 4);
    binio::write_u32(out, kVersion);
    binio::write_u32(out, static_cast<std::uint32_t>(model.geometry.width));
    binio::write_u32(out, static_cast<std::uint32_t>(model.geometry.height));
    binio::write_u32(out, static_cast<std::uint32_t>(model.geometry.channels));
    binio::write_u32(out, static_cast<std::uint32_t>(model.pair_count()));
    binio::write_u32(out, static_cast<std::uint32_t>(model.dim()));
    binio::write_f64(out, model.lambda);
    binio::write_f64(out, model.jitter_applied);
    binio::write_string(out, kernels::format_kernel_spec(model.kernel));
    binio::write_f64_array(out, model.temporal_mean.data(), model.temporal_mean.size());
    binio::write_f64_array(out, model.explanatory.data().data(), model.explanatory.data().size());
    binio::write_f64_array(out, model.coefficients.data().data(),
                           model.coefficients.data().size());
    binio::write_f64_array(out, model.final_response.data(), model.final_response.size());
    out.flush();
    if (!out) throw DataError("cannot write " + path.string());
    return static_cast<std::size_t>(out.tellp());
}

KseModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    char magic[4] = {};
    binio::read_bytes(in, magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("bad magic: not a KSE1 model file");
    const std::uint32_t version = binio::read_u32(in, "version");
    if (version != kVersion)
        throw DataError("unsupported KSE1 version " + std::to_string(version));

    KseModel model;
    model.geometry.width = binio::read_u32(in, "width");
    model.geometry.height = binio::read_u32(in, "height");
    model.geometry.channels = binio::read_u32(in, "channels");
    const std::uint32_t n_pairs = binio::read_u32(in, "n_pairs");
    const std::uint32_t dim = binio::read_u32(in, "dim");
    if (model.geometry.dim() != dim)
        throw DataError("KSE1 model: dim does not match geometry");
    model.lambda = binio::read_f64(in, "lambda");
    model.jitter_applied = binio::read_f64(in, "jitter");
    model.kernel = kernels::parse_kernel_spec(binio::read_string(in, "kernel"));
    model.temporal_mean.resize(dim);
    binio::read_f64_array(in, model.temporal_mean.data(), dim, "temporal_mean");
    model.explanatory = DenseMatrix(n_pairs, dim);
    binio::read_f64_array(in, model.explanatory.data().data(),
                          static_cast<std::size_t>(n_pairs) * dim, "explanatory");
    model.coefficients = DenseMatrix(n_pairs, dim);
    binio::read_f64_array(in, model.coefficients.data().data(),
                          static_cast<std::size_t>(n_pairs) * dim, "coefficients");
    model.final_response.resize(dim);
    binio::read_f64_array(in, model.final_response.data(), dim, "final_response");
    return model;
}

double training_residual(const KseModel& model) {
    const std::size_t n = model.pair_count();
    const std::size_t d = model.dim();
    const kernels::GramMatrix omega = kernels::gram_matrix(model.explanatory, model.kernel);

    // response rows are explanatory rows shifted by one, plus the stored
    // final row
    auto response_row = [&](std::size_t i) -> const double* {
        return i + 1 < n ? model.explanatory.row_ptr(i + 1) : model.final_response.data();
    };

    double num = 0.0;
    double den = 0.0;
    std::vector<double> acc(d);
    const double shift = model.lambda + model.jitter_applied;
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            double w = omega.values(i, j);
            if (i == j) w += shift;
            simd::axpy(w, model.coefficients.row_ptr(j), acc.data(), d);
        }
        simd::axpy(-1.0, response_row(i), acc.data(), d);
        num += simd::dot(acc.data(), acc.data(), d);
        den += simd::dot(response_row(i), response_row(i), d);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

} // namespace dyntex::kse
