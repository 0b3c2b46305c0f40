#pragma once

#include <stdexcept>
#include <string>

namespace glzero {

/// Bad input: invalid parameters, malformed files, unsafe discretizations.
/// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical method failed to deliver (no convergence, divergence, missing
/// bracket). The CLI maps this to exit code 1.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

} // namespace glzero
