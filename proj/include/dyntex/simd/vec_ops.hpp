#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel double-precision primitives used by the hot loops (Gram
// matrices, kernel vectors, triangular solves, Jacobi rotations).
//
// Every operation has a scalar reference implementation plus optional
// SIMD variants (AVX2+FMA on x86-64, NEON on aarch64). The active variant
// is picked once at runtime from CPU features, overridable with the
// DYNTEX_SIMD environment variable ("scalar", "avx2", "neon", "auto").
// SIMD variants may reassociate reductions; results agree with the scalar
// reference to rounding error, which the equivalence tests pin down.

namespace dyntex::simd {

struct VecOps {
    const char* name;
    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*sqdist)(const double* x, const double* y, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    void (*scale)(double a, double* x, std::size_t n);
    void (*rot)(double c, double s, double* x, double* y, std::size_t n);
};

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
double sqdist(const double* x, const double* y, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
// Plane rotation: (x, y) <- (c*x + s*y, c*y - s*x), applied elementwise.
void rot(double c, double s, double* x, double* y, std::size_t n);
const VecOps& ops();
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
bool supported();       // runtime CPUID check
const VecOps& ops();
} // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
bool supported();
const VecOps& ops();
} // namespace neon
#endif

// Active implementation (selected on first call, then fixed).
const VecOps& active();
const char* active_name();

// Force a specific implementation by name; throws UsageError on an unknown
// or unsupported name. Intended for tests and the DYNTEX_SIMD override.
void force(std::string_view name);

inline double dot(const double* x, const double* y, std::size_t n) {
    return active().dot(x, y, n);
}
inline double sqdist(const double* x, const double* y, std::size_t n) {
    return active().sqdist(x, y, n);
}
inline double sum(const double* x, std::size_t n) {
    return active().sum(x, n);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
    active().axpy(a, x, y, n);
}
inline void scale(double a, double* x, std::size_t n) {
    active().scale(a, x, n);
}
inline void rot(double c, double s, double* x, double* y, std::size_t n) {
    active().rot(c, s, x, y, n);
}

} // namespace dyntex::simd
