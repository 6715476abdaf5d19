#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dyntex/matrix.hpp"

namespace dyntex::kernels {

enum class KernelFamily {
    gaussian,
    linear,
    polynomial,
    rational_quadratic,
    multiquadric,
    sigmoid,
};

const char* family_name(KernelFamily f);

// Kernel family plus its numeric parameters. gamma (gaussian) and scale_a
// (polynomial, sigmoid) may be left unset, meaning "auto": gamma resolves
// to the median pairwise squared distance of the training rows, scale_a
// to 1/D. resolve() pins them; kernel evaluation requires a resolved spec.
//
// Formulas:
//   gaussian            exp(-|u-v|^2 / gamma)
//   linear              u.v
//   polynomial          (a*u.v + c)^d
//   rational_quadratic  1 - |u-v|^2 / (|u-v|^2 + c)
//   multiquadric        sqrt(|u-v|^2 + c^2)
//   sigmoid             tanh(a*u.v + c)
struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    std::optional<double> gamma;   // gaussian bandwidth (denominator), > 0
    std::optional<double> scale_a; // polynomial / sigmoid scale
    double offset_c = 1.0;
    int degree = 2; // polynomial only, >= 1

    bool resolved() const;
};

// Text grammar shared by CLI flags and model files:
//   "gaussian:gamma=1e8", "gaussian:gamma=auto", "linear",
//   "polynomial:a=0.01,c=1,d=2", "rational_quadratic:c=1",
//   "multiquadric:c=2", "sigmoid:a=auto,c=1"
// Omitted keys take their defaults (gamma=auto, a=auto, c=1, d=2).
KernelSpec parse_kernel_spec(const std::string& text);
std::string format_kernel_spec(const KernelSpec& spec);

// Validates parameter ranges; throws DataError on violations.
void validate(const KernelSpec& spec);

// Pins auto parameters against the training rows (gamma via
// median_bandwidth, scale_a via 1/cols).
KernelSpec resolve(const KernelSpec& spec, const DenseMatrix& rows);

struct GramMatrix {
    std::size_t n = 0;
    DenseMatrix values; // n x n, exactly symmetric (mirrored)
};

double kernel_value(std::span<const double> u, std::span<const double> v,
                    const KernelSpec& spec);

// Full kernel similarity matrix over the rows; upper triangle computed
// (rows in parallel), lower mirrored bit-for-bit.
GramMatrix gram_matrix(const DenseMatrix& rows, const KernelSpec& spec);

// The column [K(x, row_1), ..., K(x, row_n)].
std::vector<double> kernel_vector(std::span<const double> x, const DenseMatrix& rows,
                                  const KernelSpec& spec);

// Median of pairwise squared distances |row_i - row_j|^2 over i < j
// (average of the two middle values for an even count). Default gaussian
// bandwidth when the user passes gamma=auto.
double median_bandwidth(const DenseMatrix& rows);

} // namespace dyntex::kernels
