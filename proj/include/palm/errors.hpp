#pragma once

#include <stdexcept>
#include <string>

namespace palm {

/// Matrix is singular (or numerically singular) where a nonsingular one is required.
class singular_matrix_error : public std::runtime_error {
public:
    explicit singular_matrix_error(const std::string& what) : std::runtime_error(what) {}
};

/// The positive-definiteness conditions required by the splitting scheme do not hold.
class assumption_violation : public std::runtime_error {
public:
    assumption_violation(const std::string& what, int block)
        : std::runtime_error(what), block_index(block) {}
    int block_index;
};

/// An iterative routine hit its iteration cap before reaching the requested accuracy.
class no_convergence_error : public std::runtime_error {
public:
    explicit no_convergence_error(const std::string& what) : std::runtime_error(what) {}
};

/// A dual point offered as a certificate is infeasible beyond tolerance.
class infeasible_certificate_error : public std::runtime_error {
public:
    explicit infeasible_certificate_error(const std::string& what) : std::runtime_error(what) {}
};

/// A finite-difference probe produced a non-finite loss value.
class nonfinite_gradient_error : public std::runtime_error {
public:
    nonfinite_gradient_error(const std::string& what, int coordinate)
        : std::runtime_error(what), coordinate_index(coordinate) {}
    int coordinate_index;
};

/// Floating-point overflow/underflow made the requested computation meaningless.
class numerical_instability_error : public std::runtime_error {
public:
    explicit numerical_instability_error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed text input; carries the 1-based line where parsing failed.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, long line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
    long line_number;
};

/// Persisted data failed validation on load (version or checksum mismatch, truncation).
class load_error : public std::runtime_error {
public:
    explicit load_error(const std::string& what) : std::runtime_error(what) {}
};

/// Dataset assembly failed; the message names the offending instance.
class dataset_build_error : public std::runtime_error {
public:
    explicit dataset_build_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace palm
