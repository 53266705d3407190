#pragma once

// FHM versus a flat FCM baseline on the same scenario.

#include "fhm/fit.hpp"
#include "fhm/multiplex.hpp"
#include "fhm/scenario.hpp"

namespace fhm {

/// A one-node multiplex holding a single flat FCM over every concept of m.
/// Its matrix is block-diagonal in m's inner weights, couplings and outer
/// parts are zero, and the scenario is flattened to match (targets become a
/// 1 x (outer_n * metric_count) row, node-major).
struct FlatBaseline {
    Multiplex model;
    Scenario scenario;
};

FlatBaseline flat_baseline(const Multiplex& m, const Scenario& scenario);

/// m with every down coupling zero and the full cross-node inter-layer edge
/// set at weight zero. From this start the FHM reproduces the flat baseline
/// exactly, while its parameter set strictly contains the baseline's.
Multiplex embedding_start(const Multiplex& m);

struct Comparison {
    double fhm_initial_loss = 0.0;
    double fcm_initial_loss = 0.0;
    double fhm_final_loss = 0.0;
    double fcm_final_loss = 0.0;
    FitResult fhm;
    FitResult fcm;
};

/// Fit both models with the same config and iteration budget on the plain L2
/// fit term (beta is ignored: a flat map has no hierarchy to align).
Comparison compare_fhm_fcm(const Scenario& scenario, const FitConfig& cfg);

}  // namespace fhm
