#pragma once

// Foundational value types shared by the whole library: fuzzy degrees,
// fuzzy intervals, the squashing function, a small dense matrix and the
// error hierarchy.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fhm {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Non-finite or out-of-domain numeric input.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Shape, index, or range violation in arguments.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Optimization hit a non-finite value.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::size_t iteration)
        : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

/// Malformed document; the message carries the field path or byte position.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Well-formed document whose content violates a range or shape rule.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// ---------------------------------------------------------------------------
// Fuzzy values
// ---------------------------------------------------------------------------

/// Membership degree in [0,1]. Construction rejects anything outside.
class FuzzyValue {
public:
    FuzzyValue() = default;
    explicit FuzzyValue(double v);

    /// Explicit clamp into [0,1]; NaN is still rejected.
    static FuzzyValue clamped(double v);

    double value() const noexcept { return value_; }
    friend bool operator==(FuzzyValue, FuzzyValue) = default;

private:
    double value_ = 0.0;
};

/// Closed subinterval [lo, hi] of [0,1]. lo > hi is an error, never reordered.
class FuzzyInterval {
public:
    FuzzyInterval() = default;
    FuzzyInterval(double lo, double hi);
    static FuzzyInterval crisp(double v) { return {v, v}; }

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double width() const noexcept { return hi_ - lo_; }
    double midpoint() const noexcept { return lo_ + 0.5 * (hi_ - lo_); }
    bool degenerate() const noexcept { return lo_ == hi_; }
    bool contains(double v) const noexcept { return lo_ <= v && v <= hi_; }
    bool contains(const FuzzyInterval& o) const noexcept { return lo_ <= o.lo_ && o.hi_ <= hi_; }

    friend bool operator==(const FuzzyInterval&, const FuzzyInterval&) = default;

private:
    double lo_ = 0.0;
    double hi_ = 0.0;
};

/// Smallest interval containing every sample.
FuzzyInterval interval_hull(std::span<const double> samples);

// ---------------------------------------------------------------------------
// Squashing
// ---------------------------------------------------------------------------

enum class SquashKind { logistic };

struct SquashingFunction {
    SquashKind kind = SquashKind::logistic;
    double steepness = 1.0;

    SquashingFunction() = default;
    explicit SquashingFunction(double steepness_, SquashKind kind_ = SquashKind::logistic);

    friend bool operator==(const SquashingFunction&, const SquashingFunction&) = default;
};

/// 1 / (1 + exp(-steepness * x)).
double squash(const SquashingFunction& f, double x);

/// d/dx squash(f, x) = steepness * s * (1 - s).
double squash_grad(const SquashingFunction& f, double x);

/// Derivative expressed through an already computed output s.
inline double squash_grad_from_output(const SquashingFunction& f, double s) noexcept {
    return f.steepness * s * (1.0 - s);
}

// ---------------------------------------------------------------------------
// Dense row-major matrix
// ---------------------------------------------------------------------------

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Deterministic random draws
// ---------------------------------------------------------------------------

/// Uniform double in [0,1) from the top 53 bits of a 64-bit draw. Unlike
/// std::uniform_real_distribution this is identical across standard libraries.
inline double unit_draw(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace fhm
