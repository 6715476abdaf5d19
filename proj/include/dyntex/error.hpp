#pragma once

#include <stdexcept>
#include <string>

namespace dyntex {

// Error taxonomy mirrors the CLI exit-code contract:
//   UsageError -> 1, DataError -> 2, NumericError -> 3.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or inconsistent input data (unreadable files, geometry mismatch,
// degenerate sequences, malformed model files).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (factorization breakdown, SVD non-convergence).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace dyntex
