#pragma once

#include <stdexcept>
#include <string>

namespace argos {

/// Base of every error raised by the library. `code()` is a stable,
/// machine-parsable identifier (e.g. "insufficient-data").
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error("invalid-argument", what) {}
};

class InsufficientData : public Error {
public:
    explicit InsufficientData(const std::string& what) : Error("insufficient-data", what) {}
};

class DivergenceError : public Error {
public:
    DivergenceError(std::size_t step, const std::string& what)
        : Error("divergence", what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class OverflowError : public Error {
public:
    OverflowError(std::size_t row, std::size_t col, const std::string& what)
        : Error("overflow", what), row_(row), col_(col) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

class NonConvergence : public Error {
public:
    NonConvergence(double kkt_violation, const std::string& what)
        : Error("non-convergence", what), kkt_violation_(kkt_violation) {}
    double kkt_violation() const noexcept { return kkt_violation_; }

private:
    double kkt_violation_;
};

class SingularFit : public Error {
public:
    explicit SingularFit(const std::string& what) : Error("singular-fit", what) {}
};

class DegenerateGrid : public Error {
public:
    explicit DegenerateGrid(const std::string& what) : Error("degenerate-grid", what) {}
};

}  // namespace argos
