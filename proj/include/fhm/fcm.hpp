#pragma once

// Flat fuzzy cognitive map: the baseline model and the building block nested
// inside every outer node of a multiplex.

#include <cstddef>
#include <span>
#include <vector>

#include "fhm/core.hpp"

namespace fhm {

/// Activation degrees of a set of concepts. Plain doubles in [0,1]; the
/// bound is an invariant of every update, checked by the test suites.
using ActivationVector = std::vector<double>;

class Fcm {
public:
    /// Throws ArgumentError unless weights is n x n with entries in [-1,1]
    /// and external_input has n finite entries.
    Fcm(Matrix weights, std::vector<double> external_input, SquashingFunction squash = {});

    std::size_t size() const noexcept { return weights_.rows(); }
    const Matrix& weights() const noexcept { return weights_; }
    const std::vector<double>& external_input() const noexcept { return input_; }
    const SquashingFunction& squash() const noexcept { return squash_; }

    friend bool operator==(const Fcm&, const Fcm&) = default;

private:
    Matrix weights_;
    std::vector<double> input_;
    SquashingFunction squash_;
};

enum class RunStatus { fixpoint, cycle, budget_exhausted };

const char* to_string(RunStatus s) noexcept;

template <typename State>
struct RunResult {
    State state;
    RunStatus status;
    std::size_t steps;
};

/// a'[c] = squash(sum_j W[j][c] a[j] + x[c]): row j of W holds the edges
/// leaving concept j, the same convention as the outer weights.
ActivationVector fcm_step(const Fcm& m, std::span<const double> a);

/// Iterate fcm_step until the max-norm change drops below tol (fixpoint), a
/// previously visited state recurs within tol (cycle), or max_steps is spent.
RunResult<ActivationVector> fcm_run(const Fcm& m, const ActivationVector& a0,
                                    std::size_t max_steps, double tol);

/// Max-norm distance; both spans must have equal length.
double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace fhm
