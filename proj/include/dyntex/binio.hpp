#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "dyntex/error.hpp"

// Little-endian primitives for the model file formats. On little-endian
// hosts array reads/writes are single bulk transfers.

namespace dyntex::binio {

template <typename T>
inline T byteswap_integral(T v) {
    T out{};
    auto* src = reinterpret_cast<const unsigned char*>(&v);
    auto* dst = reinterpret_cast<unsigned char*>(&out);
    for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = src[sizeof(T) - 1 - i];
    return out;
}

inline void write_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out) throw DataError("write failed");
}

inline void read_bytes(std::istream& in, void* p, std::size_t n, const char* what) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw DataError(std::string("truncated model file (reading ") + what + ")");
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) v = byteswap_integral(v);
    write_bytes(out, &v, 4);
}

inline std::uint32_t read_u32(std::istream& in, const char* what) {
    std::uint32_t v = 0;
    read_bytes(in, &v, 4, what);
    if constexpr (std::endian::native == std::endian::big) v = byteswap_integral(v);
    return v;
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) v = byteswap_integral(v);
    write_bytes(out, &v, 8);
}

inline std::uint64_t read_u64(std::istream& in, const char* what) {
    std::uint64_t v = 0;
    read_bytes(in, &v, 8, what);
    if constexpr (std::endian::native == std::endian::big) v = byteswap_integral(v);
    return v;
}

inline void write_f64(std::ostream& out, double v) {
    write_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline double read_f64(std::istream& in, const char* what) {
    return std::bit_cast<double>(read_u64(in, what));
}

inline void write_f64_array(std::ostream& out, const double* p, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        write_bytes(out, p, n * 8);
    } else {
        for (std::size_t i = 0; i < n; ++i) write_f64(out, p[i]);
    }
}

inline void read_f64_array(std::istream& in, double* p, std::size_t n, const char* what) {
    if constexpr (std::endian::native == std::endian::little) {
        read_bytes(in, p, n * 8, what);
    } else {
        for (std::size_t i = 0; i < n; ++i) p[i] = read_f64(in, what);
    }
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    write_bytes(out, s.data(), s.size());
}

inline std::string read_string(std::istream& in, const char* what) {
    const std::uint32_t n = read_u32(in, what);
    if (n > (1u << 20)) throw DataError(std::string("truncated model file (reading ") + what + ")");
    std::string s(n, '\0');
    read_bytes(in, s.data(), n, what);
    return s;
}

} // namespace dyntex::binio
