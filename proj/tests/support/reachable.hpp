#pragma once

// One node, one concept, one metric, target 0.6. Every parameter starts at
// zero and the input is frozen at 0, so the map reduces to the self-loop
// z <- squash(w z) plus coupling and outer terms.

#include <cmath>
#include <vector>

#include "fhm/multiplex.hpp"
#include "fhm/scenario.hpp"
#include "support/oracles.hpp"

namespace fhm::testing {

inline constexpr double kReachableTarget = 0.6;

inline Scenario reachable_scenario() {
    Scenario s;
    s.name = "reachable-single-node";
    s.seed = 0;
    s.topology.outer_n = 1;
    s.topology.inner_n = {1};
    s.inputs = {FuzzyInterval::crisp(0.0)};
    s.metrics.names = {"wait"};
    s.metrics.readout_map = {{0}};
    s.targets = Matrix{{kReachableTarget}};
    s.initial_state.outer = {0.5};
    s.initial_state.inners = {{0.5}};
    s.initial_state.interlayer_input = {{0.0}};
    s.multiplex = Multiplex(Matrix{{0.0}}, {0.0}, {Fcm(Matrix{{0.0}}, {0.0})}, {{0.0}},
                            {Aggregation::mean}, {});
    return s;
}

struct GridOracle {
    double best_w;
    double best_gap;
    bool bracketed;
};

/// 1-D grid over the self-loop weight with every other parameter at zero:
/// z_T(w) after `steps` updates from z = 0.5. A sign change of z_T - target
/// between neighbouring grid points proves the target is attained by some w
/// in [-1, 1] (z_T is continuous in w).
inline GridOracle reachable_grid_oracle(std::size_t steps, std::size_t points = 20001) {
    GridOracle o{0.0, 1e300, false};
    double prev_gap = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
        const double w = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(points - 1);
        double z = 0.5;
        for (std::size_t t = 0; t < steps; ++t) z = logistic(1.0, w * z);
        const double gap = z - kReachableTarget;
        if (std::abs(gap) < o.best_gap) {
            o.best_gap = std::abs(gap);
            o.best_w = w;
        }
        if (k > 0 && ((prev_gap <= 0.0 && gap >= 0.0) || (prev_gap >= 0.0 && gap <= 0.0))) {
            o.bracketed = true;
        }
        prev_gap = gap;
    }
    return o;
}

/// A scenario whose settled dynamics overflow the reverse pass: every
/// pre-activation sits at exactly 0 while the steepness is 1e200.
inline Scenario overflowing_scenario() {
    const SquashingFunction steep(1e200);
    Scenario s = reachable_scenario();
    s.name = "overflowing-gradient";
    s.targets = Matrix{{0.9}};
    s.multiplex = Multiplex(Matrix{{0.0}}, {-0.5}, {Fcm(Matrix{{0.0}}, {-0.5}, steep)}, {{1.0}},
                            {Aggregation::mean}, {}, steep);
    return s;
}

}  // namespace fhm::testing
