#pragma once

#include <stdexcept>
#include <string>

namespace fpbandits {

// Thrown when a symmetric factorization hits a non-positive pivot/eigenvalue.
struct NotPositiveDefinite : std::runtime_error {
    explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a link evaluation leaves the representable floating-point range.
struct OverflowError : std::runtime_error {
    explicit OverflowError(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidDelta : std::invalid_argument {
    explicit InvalidDelta(const std::string& what) : std::invalid_argument(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fpbandits
