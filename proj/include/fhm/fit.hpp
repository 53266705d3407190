#pragma once

// Fitting a multiplex to scenario targets.
//
// Objective, after running the dynamics settle_steps steps from the
// scenario's initial state:
//
//   fit   = 1/2 sum_{i,k} (readout(i,k) - L[i][k])^2
//   align = 1/2 sum_i r_i^2,   r_i = (v+1)(u+1) + 2z - sum_k L[i][k]
//   total = fit + beta * align
//
// with u = Y_i, v = agg(z_i), z = total inter-layer input into node i in the
// final step. Gradients come from reverse accumulation through the unrolled
// steps; the optimizer is projected gradient descent with Armijo backtracking.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fhm/core.hpp"
#include "fhm/multiplex.hpp"
#include "fhm/scenario.hpp"

namespace fhm {

/// (v+1)(u+1) + 2z - L.
double alignment_residual(double u, double v, double z, double target_sum);

struct ResidualGrad {
    double du;
    double dv;
    double dz;
    friend bool operator==(const ResidualGrad&, const ResidualGrad&) = default;
};

/// Exact partials of alignment_residual: (v+1, u+1, 2).
ResidualGrad alignment_residual_grad(double u, double v, double z, double target_sum);

/// Parameter groups; a bit set selects which ones the optimizer may move.
enum ParamGroup : unsigned {
    kInnerWeights = 1u << 0,
    kExternalInputs = 1u << 1,
    kCouplings = 1u << 2,
    kOuterWeights = 1u << 3,
    kOuterBias = 1u << 4,
    kInterlayer = 1u << 5,
    kAllGroups = (1u << 6) - 1,
};

struct FitConfig {
    double step_size = 1.0;
    std::size_t max_iters = 500;
    double grad_tol = 1e-8;
    double beta = 0.1;
    std::size_t settle_steps = 8;
    std::uint64_t seed = 42;
    /// External inputs carry the scenario's data and stay fixed by default.
    unsigned trainable = kAllGroups & ~kExternalInputs;
    double armijo = 1e-4;
    std::size_t max_halvings = 60;

    void validate() const;
};

struct LossValue {
    double total = 0.0;
    double fit_term = 0.0;
    double align_term = 0.0;
};

LossValue loss(const Multiplex& m, const Scenario& scenario, const FitConfig& cfg);

struct LossAndGrad {
    LossValue value;
    MultiplexParameters grad;
};

/// Loss and its gradient with respect to every parameter group.
LossAndGrad loss_grad(const Multiplex& m, const Scenario& scenario, const FitConfig& cfg);

/// Summed loss and gradient over a batch. Scenarios may be evaluated on up to
/// `workers` threads; the reduction runs in batch order so the result does
/// not depend on the worker count.
LossAndGrad loss_grad(const Multiplex& m, std::span<const Scenario> batch, const FitConfig& cfg,
                      std::size_t workers = 1);

/// Settled state after cfg.settle_steps steps from the scenario's initial state.
MultiplexState settle(const Multiplex& m, const Scenario& scenario, const FitConfig& cfg);

enum class FitStatus { converged, budget_exhausted };
const char* to_string(FitStatus s) noexcept;

struct FitResult {
    Multiplex fitted;
    std::vector<double> loss_trace;
    LossValue final_loss;
    MultiplexState final_state;
    FitStatus status;
    std::size_t iters;
};

/// Projected gradient descent. Throws NumericalError on a non-finite loss or
/// gradient.
FitResult fit(const Multiplex& m0, const Scenario& scenario, const FitConfig& cfg);

/// Starting model for a scenario: complete outer graph, full inner matrices,
/// every cross-node concept pair as an inter-layer edge. Weights seeded
/// uniform in [-0.5, 0.5], biases zero, external inputs = input midpoints.
/// A scenario that carries its own multiplex returns that instead.
Multiplex build_multiplex(const Scenario& scenario, std::uint64_t seed,
                          SquashingFunction squash = {});

/// build_multiplex + fit.
FitResult fit_scenario(const Scenario& scenario, const FitConfig& cfg);

/// Copy of m whose inner external inputs are replaced (flattened per concept).
Multiplex with_inputs(const Multiplex& m, std::span<const double> inputs);

/// Settled metric readout for m, node-major.
Matrix settled_metrics(const Multiplex& m, const Scenario& scenario, const FitConfig& cfg);

struct IntervalPropagation {
    /// outer_n x metric count.
    std::vector<std::vector<FuzzyInterval>> intervals;
    /// Every evaluated input assignment and its readout.
    std::vector<std::vector<double>> samples;
    std::vector<Matrix> outputs;
};

/// IVFS propagation: evaluate the settled readout at interval vertices (the
/// all-lo and all-hi vertices first), the midpoint, and seeded interior
/// points, budget evaluations in total, and hull the outputs per
/// (node, metric). `extra_samples` are evaluated in addition; each must lie
/// inside the input box.
IntervalPropagation propagate_intervals(const Multiplex& m, const Scenario& scenario,
                                        std::span<const FuzzyInterval> inputs,
                                        const FitConfig& cfg, std::size_t budget,
                                        std::span<const std::vector<double>> extra_samples = {});

}  // namespace fhm
