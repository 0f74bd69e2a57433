#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmimvc {

using index_t = std::size_t;
using IndexVec = std::vector<index_t>;

/// Bad user input: unreadable files, inconsistent shapes, invalid flag
/// combinations. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure at runtime: loss explosion, non-finite gradients,
/// degenerate temperature. The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hmimvc
