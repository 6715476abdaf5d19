#include "dyntex/simd/vec_ops.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "dyntex/error.hpp"

namespace dyntex::simd {

namespace {

const VecOps* pick(std::string_view name) {
    if (name == "scalar") return &scalar::ops();
#if defined(__x86_64__) || defined(_M_X64)
    if (name == "avx2") {
        if (!avx2::supported())
            throw UsageError("DYNTEX_SIMD=avx2 requested but CPU lacks AVX2+FMA");
        return &avx2::ops();
    }
#endif
#if defined(__aarch64__)
    if (name == "neon") {
        if (!neon::supported())
            throw UsageError("DYNTEX_SIMD=neon requested but CPU lacks NEON");
        return &neon::ops();
    }
#endif
    if (name == "auto" || name.empty()) {
#if defined(__x86_64__) || defined(_M_X64)
        if (avx2::supported()) return &avx2::ops();
#endif
#if defined(__aarch64__)
        if (neon::supported()) return &neon::ops();
#endif
        return &scalar::ops();
    }
    throw UsageError("unknown SIMD implementation '" + std::string(name) +
                     "' (expected auto, scalar, avx2, or neon)");
}

std::atomic<const VecOps*> g_active{nullptr};

const VecOps* init() {
    const char* env = std::getenv("DYNTEX_SIMD");
    const VecOps* chosen = pick(env ? std::string_view(env) : std::string_view("auto"));
    g_active.store(chosen, std::memory_order_release);
    return chosen;
}

} // namespace

const VecOps& active() {
    const VecOps* p = g_active.load(std::memory_order_acquire);
    if (!p) p = init();
    return *p;
}

const char* active_name() { return active().name; }

void force(std::string_view name) {
    g_active.store(pick(name), std::memory_order_release);
}

} // namespace dyntex::simd
