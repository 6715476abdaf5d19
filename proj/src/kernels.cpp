#include "dyntex/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "dyntex/error.hpp"
#include "dyntex/parallel.hpp"
#include "dyntex/simd/vec_ops.hpp"

namespace dyntex::kernels {

const char* family_name(KernelFamily f) {
    switch (f) {
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::linear: return "linear";
        case KernelFamily::polynomial: return "polynomial";
        case KernelFamily::rational_quadratic: return "rational_quadratic";
        case KernelFamily::multiquadric: return "multiquadric";
        case KernelFamily::sigmoid: return "sigmoid";
    }
    return "?";
}

bool KernelSpec::resolved() const {
    if (family == KernelFamily::gaussian) return gamma.has_value();
    if (family == KernelFamily::polynomial || family == KernelFamily::sigmoid)
        return scale_a.has_value();
    return true;
}

namespace {

KernelFamily parse_family(const std::string& name) {
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "linear") return KernelFamily::linear;
    if (name == "polynomial") return KernelFamily::polynomial;
    if (name == "rational_quadratic") return KernelFamily::rational_quadratic;
    if (name == "multiquadric") return KernelFamily::multiquadric;
    if (name == "sigmoid") return KernelFamily::sigmoid;
    throw DataError("unknown kernel family '" + name + "'");
}

double parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw DataError("kernel spec: bad numeric value '" + value + "' for " + key);
    }
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

KernelSpec parse_kernel_spec(const std::string& text) {
    KernelSpec spec;
    const std::size_t colon = text.find(':');
    spec.family = parse_family(text.substr(0, colon));
    if (colon != std::string::npos) {
        std::string params = text.substr(colon + 1);
        std::size_t pos = 0;
        while (pos < params.size()) {
            std::size_t comma = params.find(',', pos);
            if (comma == std::string::npos) comma = params.size();
            const std::string item = params.substr(pos, comma - pos);
            pos = comma + 1;
            if (item.empty()) continue;
            const std::size_t eq = item.find('=');
            if (eq == std::string::npos)
                throw DataError("kernel spec: expected key=value, got '" + item + "'");
            const std::string key = item.substr(0, eq);
            const std::string value = item.substr(eq + 1);
            if (key == "gamma" && spec.family == KernelFamily::gaussian) {
                if (value == "auto")
                    spec.gamma.reset();
                else
                    spec.gamma = parse_number(key, value);
            } else if (key == "a" && (spec.family == KernelFamily::polynomial ||
                                      spec.family == KernelFamily::sigmoid)) {
                if (value == "auto")
                    spec.scale_a.reset();
                else
                    spec.scale_a = parse_number(key, value);
            } else if (key == "c" && spec.family != KernelFamily::gaussian &&
                       spec.family != KernelFamily::linear) {
                spec.offset_c = parse_number(key, value);
            } else if (key == "d" && spec.family == KernelFamily::polynomial) {
                const double v = parse_number(key, value);
                spec.degree = static_cast<int>(v);
                if (static_cast<double>(spec.degree) != v)
                    throw DataError("kernel spec: degree must be an integer");
            } else {
                throw DataError("kernel spec: key '" + key + "' not valid for family " +
                                family_name(spec.family));
            }
        }
    }
    validate(spec);
    return spec;
}

std::string format_kernel_spec(const KernelSpec& spec) {
    std::string out = family_name(spec.family);
    switch (spec.family) {
        case KernelFamily::gaussian:
            out += ":gamma=" + (spec.gamma ? format_number(*spec.gamma) : std::string("auto"));
            break;
        case KernelFamily::linear:
            break;
        case KernelFamily::polynomial:
            out += ":a=" + (spec.scale_a ? format_number(*spec.scale_a) : std::string("auto"));
            out += ",c=" + format_number(spec.offset_c);
            out += ",d=" + std::to_string(spec.degree);
            break;
        case KernelFamily::rational_quadratic:
        case KernelFamily::multiquadric:
            out += ":c=" + format_number(spec.offset_c);
            break;
        case KernelFamily::sigmoid:
            out += ":a=" + (spec.scale_a ? format_number(*spec.scale_a) : std::string("auto"));
            out += ",c=" + format_number(spec.offset_c);
            break;
    }
    return out;
}

void validate(const KernelSpec& spec) {
    auto finite = [](std::optional<double> v) { return !v || std::isfinite(*v); };
    if (!finite(spec.gamma) || !finite(spec.scale_a) || !std::isfinite(spec.offset_c))
        throw DataError("kernel spec: parameters must be finite");
    switch (spec.family) {
        case KernelFamily::gaussian:
            if (spec.gamma && *spec.gamma <= 0.0)
                throw DataError("kernel spec: gaussian bandwidth must be > 0");
            break;
        case KernelFamily::polynomial:
            if (spec.degree < 1)
                throw DataError("kernel spec: polynomial degree must be >= 1");
            break;
        case KernelFamily::rational_quadratic:
        case KernelFamily::multiquadric:
            if (spec.offset_c <= 0.0)
                throw DataError("kernel spec: offset c must be > 0");
            break;
        default:
            break;
    }
}

KernelSpec resolve(const KernelSpec& spec, const DenseMatrix& rows) {
    KernelSpec out = spec;
    if (out.family == KernelFamily::gaussian && !out.gamma)
        out.gamma = median_bandwidth(rows);
    if ((out.family == KernelFamily::polynomial || out.family == KernelFamily::sigmoid) &&
        !out.scale_a)
        out.scale_a = 1.0 / static_cast<double>(rows.cols());
    validate(out);
    return out;
}

namespace {

double eval(const double* u, const double* v, std::size_t n, const KernelSpec& spec) {
    switch (spec.family) {
        case KernelFamily::gaussian: {
            const double d2 = simd::sqdist(u, v, n);
            if (!std::isfinite(d2)) throw DataError("kernel_value: non-finite input");
            return std::exp(-d2 / *spec.gamma);
        }
        case KernelFamily::linear: {
            const double d = simd::dot(u, v, n);
            if (!std::isfinite(d)) throw DataError("kernel_value: non-finite input");
            return d;
        }
        case KernelFamily::polynomial: {
            const double d = simd::dot(u, v, n);
            if (!std::isfinite(d)) throw DataError("kernel_value: non-finite input");
            return std::pow(*spec.scale_a * d + spec.offset_c, spec.degree);
        }
        case KernelFamily::rational_quadratic: {
            const double d2 = simd::sqdist(u, v, n);
            if (!std::isfinite(d2)) throw DataError("kernel_value: non-finite input");
            return 1.0 - d2 / (d2 + spec.offset_c);
        }
        case KernelFamily::multiquadric: {
            const double d2 = simd::sqdist(u, v, n);
            if (!std::isfinite(d2)) throw DataError("kernel_value: non-finite input");
            return std::sqrt(d2 + spec.offset_c * spec.offset_c);
        }
        case KernelFamily::sigmoid: {
            const double d = simd::dot(u, v, n);
            if (!std::isfinite(d)) throw DataError("kernel_value: non-finite input");
            return std::tanh(*spec.scale_a * d + spec.offset_c);
        }
    }
    throw DataError("kernel_value: unknown family");
}

void require_resolved(const KernelSpec& spec) {
    if (!spec.resolved())
        throw DataError("kernel spec has unresolved auto parameters");
}

} // namespace

double kernel_value(std::span<const double> u, std::span<const double> v,
                    const KernelSpec& spec) {
    if (u.size() != v.size())
        throw DataError("kernel_value: dimension mismatch");
    require_resolved(spec);
    return eval(u.data(), v.data(), u.size(), spec);
}

GramMatrix gram_matrix(const DenseMatrix& rows, const KernelSpec& spec) {
    require_resolved(spec);
    const std::size_t n = rows.rows();
    const std::size_t d = rows.cols();
    if (n < 1) throw DataError("gram_matrix: need at least one row");
    GramMatrix g;
    g.n = n;
    g.values = DenseMatrix(n, n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = eval(rows.row_ptr(i), rows.row_ptr(j), d, spec);
            g.values(i, j) = v;
            g.values(j, i) = v;
        }
    });
    return g;
}

std::vector<double> kernel_vector(std::span<const double> x, const DenseMatrix& rows,
                                  const KernelSpec& spec) {
    if (x.size() != rows.cols())
        throw DataError("kernel_vector: dimension mismatch");
    require_resolved(spec);
    std::vector<double> out(rows.rows());
    parallel_for(rows.rows(), [&](std::size_t i) {
        out[i] = eval(x.data(), rows.row_ptr(i), x.size(), spec);
    });
    return out;
}

double median_bandwidth(const DenseMatrix& rows) {
    const std::size_t n = rows.rows();
    if (n < 2) throw DataError("median_bandwidth: need at least two rows");
    std::vector<double> dists;
    dists.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            dists.push_back(simd::sqdist(rows.row_ptr(i), rows.row_ptr(j), rows.cols()));
    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
    double median = dists[mid];
    if (dists.size() % 2 == 0) {
        const double lower = *std::max_element(dists.begin(), dists.begin() + mid);
        median = 0.5 * (lower + median);
    }
    if (median <= 0.0) throw DataError("degenerate sequence");
    return median;
}

} // namespace dyntex::kernels
