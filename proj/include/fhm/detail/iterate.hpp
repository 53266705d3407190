#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <vector>

#include "fhm/fcm.hpp"

namespace fhm::detail {

// Shared settle loop for fcm_run and multiplex_run. `flatten` maps a state to
// the vector compared for fixpoint/cycle detection.
template <typename State, typename Step, typename Flatten>
RunResult<State> iterate(const State& s0, Step&& step, Flatten&& flatten, std::size_t max_steps,
                         double tol) {
    if (!(tol > 0.0)) throw ArgumentError("run tolerance must be positive");
    State cur = s0;
    std::vector<double> cur_flat = flatten(cur);
    // Visited states older than the immediate predecessor; capped at max_steps.
    std::deque<std::vector<double>> history;
    for (std::size_t k = 1; k <= max_steps; ++k) {
        State next = step(cur);
        std::vector<double> next_flat = flatten(next);
        if (max_abs_diff(cur_flat, next_flat) < tol) {
            return {std::move(next), RunStatus::fixpoint, k};
        }
        for (const auto& old : history) {
            if (max_abs_diff(old, next_flat) < tol) {
                return {std::move(next), RunStatus::cycle, k};
            }
        }
        history.push_back(std::move(cur_flat));
        if (history.size() > max_steps) history.pop_front();
        cur = std::move(next);
        cur_flat = std::move(next_flat);
    }
    return {std::move(cur), RunStatus::budget_exhausted, max_steps};
}

}  // namespace fhm::detail
