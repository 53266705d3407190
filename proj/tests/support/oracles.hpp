#pragma once

// Test-only oracles. Nothing here calls into the engine's dynamics or
// gradient code: the straight-line step, the reference loss and the
// finite-difference gradient are written from the model equations directly.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fhm/fit.hpp"
#include "fhm/multiplex.hpp"
#include "fhm/scenario.hpp"

namespace fhm::testing {

inline double logistic(double lambda, double x) { return 1.0 / (1.0 + std::exp(-lambda * x)); }

struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit_draw(engine()); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine() % n); }
    bool coin() { return (engine() >> 63) != 0; }
};

struct InstanceShape {
    std::size_t outer_n = 2;
    std::size_t max_concepts = 3;
    bool coupled = true;
    bool interlayer = true;
    double weight_range = 0.9;
    bool random_aggregation = true;
};

inline Multiplex random_multiplex(Rng& rng, const InstanceShape& shape,
                                  SquashingFunction squash = {}) {
    const std::size_t n = shape.outer_n;
    const double r = shape.weight_range;
    std::vector<std::size_t> sizes(n);
    for (auto& s : sizes) s = 1 + rng.below(shape.max_concepts);
    std::vector<Fcm> inner;
    std::vector<std::vector<double>> coupling(n);
    std::vector<Aggregation> agg(n, Aggregation::mean);
    for (std::size_t i = 0; i < n; ++i) {
        Matrix w(sizes[i], sizes[i]);
        for (double& v : w.data()) v = rng.uniform(-r, r);
        std::vector<double> x(sizes[i]);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        inner.emplace_back(std::move(w), std::move(x), squash);
        coupling[i].resize(sizes[i]);
        for (double& d : coupling[i]) d = shape.coupled ? rng.uniform(-r, r) : 0.0;
        if (shape.random_aggregation && rng.coin()) agg[i] = Aggregation::max;
    }
    Matrix outer(n, n);
    for (double& v : outer.data()) v = rng.uniform(-r, r);
    std::vector<double> bias(n);
    for (double& b : bias) b = rng.uniform(-1.0, 1.0);
    std::vector<InterlayerEdge> edges;
    if (shape.interlayer && n > 1) {
        const std::size_t count = 1 + rng.below(2 * n);
        for (std::size_t e = 0; e < count; ++e) {
            const std::size_t src = rng.below(n);
            std::size_t dst = rng.below(n - 1);
            if (dst >= src) ++dst;
            edges.push_back({src, rng.below(sizes[src]), dst, rng.below(sizes[dst]),
                             rng.uniform(-r, r)});
        }
    }
    return Multiplex(std::move(outer), std::move(bias), std::move(inner), std::move(coupling),
                     std::move(agg), std::move(edges), squash);
}

inline MultiplexState random_state(Rng& rng, const Multiplex& m) {
    ActivationVector outer(m.outer_size());
    for (double& y : outer) y = rng.uniform(0.01, 0.99);
    std::vector<ActivationVector> inners;
    for (std::size_t i = 0; i < m.outer_size(); ++i) {
        ActivationVector z(m.inner_size(i));
        for (double& v : z) v = rng.uniform(0.01, 0.99);
        inners.push_back(std::move(z));
    }
    return make_state(m, std::move(outer), std::move(inners));
}

/// Scenario matching m's topology with random targets and readout map.
inline Scenario random_scenario(Rng& rng, const Multiplex& m) {
    Scenario s;
    s.name = "random";
    s.topology.outer_n = m.outer_size();
    std::size_t min_concepts = m.inner_size(0);
    for (std::size_t i = 0; i < m.outer_size(); ++i) {
        s.topology.inner_n.push_back(m.inner_size(i));
        min_concepts = std::min(min_concepts, m.inner_size(i));
        for (double x : m.inner()[i].external_input()) {
            (void)x;
            s.inputs.push_back(FuzzyInterval::crisp(0.5));
        }
    }
    const std::size_t k = 1 + rng.below(min_concepts);
    for (std::size_t q = 0; q < k; ++q) s.metrics.names.push_back("m" + std::to_string(q));
    s.targets = Matrix(m.outer_size(), k);
    for (double& t : s.targets.data()) t = rng.uniform(0.0, 1.0);
    for (std::size_t i = 0; i < m.outer_size(); ++i) {
        std::vector<std::size_t> row;
        for (std::size_t q = 0; q < k; ++q) row.push_back(rng.below(m.inner_size(i)));
        s.metrics.readout_map.push_back(std::move(row));
    }
    s.initial_state = random_state(rng, m);
    return s;
}

/// Straight-line re-evaluation of one coupled step. Outer incoming sums run
/// in index order, so bit equality with the engine holds for <= 2 outer nodes
/// (two-term sums are order-free); larger instances compare with a tolerance.
inline MultiplexState reference_step(const Multiplex& m, const MultiplexState& s) {
    const double lambda = m.squash().steepness;
    const std::size_t n = m.outer_size();
    MultiplexState next;
    next.inners.resize(n);
    next.interlayer_input.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ni = m.inner_size(i);
        std::vector<double> inter(ni, 0.0);
        for (const auto& e : m.interlayer()) {
            if (e.dst_node == i) inter[e.dst_concept] += e.weight * s.inners[e.src_node][e.src_concept];
        }
        next.inners[i].resize(ni);
        for (std::size_t c = 0; c < ni; ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < ni; ++j) acc += m.inner()[i].weights()(j, c) * s.inners[i][j];
            const double pre = acc + m.inner()[i].external_input()[c] +
                               m.down_coupling()[i][c] * s.outer[i] + inter[c];
            next.inners[i][c] = logistic(lambda, pre);
        }
        next.interlayer_input[i] = inter;
    }
    next.outer.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += m.outer_weights()(j, i) * s.outer[j];
        const auto& z = next.inners[i];
        double agg;
        if (m.up_aggregation()[i] == Aggregation::max) {
            agg = *std::max_element(z.begin(), z.end());
        } else {
            agg = 0.0;
            for (double v : z) agg += v;
            agg /= static_cast<double>(z.size());
        }
        next.outer[i] = logistic(lambda, acc + m.outer_bias()[i] + agg);
    }
    return next;
}

/// Reference objective from the written formulas.
inline LossValue reference_loss(const Multiplex& m, const Scenario& sc, const FitConfig& cfg) {
    MultiplexState s = sc.initial_state;
    for (std::size_t t = 0; t < cfg.settle_steps; ++t) s = reference_step(m, s);
    LossValue v;
    for (std::size_t i = 0; i < m.outer_size(); ++i) {
        double target_sum = 0.0;
        for (std::size_t k = 0; k < sc.metrics.count(); ++k) {
            const double d = s.inners[i][sc.metrics.readout_map[i][k]] - sc.targets(i, k);
            v.fit_term += 0.5 * d * d;
            target_sum += sc.targets(i, k);
        }
        const auto& z = s.inners[i];
        double agg = m.up_aggregation()[i] == Aggregation::max
                         ? *std::max_element(z.begin(), z.end())
                         : [&] {
                               double a = 0.0;
                               for (double q : z) a += q;
                               return a / static_cast<double>(z.size());
                           }();
        double inter = 0.0;
        for (double q : s.interlayer_input[i]) inter += q;
        const double r = (agg + 1.0) * (s.outer[i] + 1.0) + 2.0 * inter - target_sum;
        v.align_term += 0.5 * r * r;
    }
    v.total = v.fit_term + cfg.beta * v.align_term;
    return v;
}

/// Central differences of the engine's loss over every parameter.
inline std::vector<double> fd_gradient(const Multiplex& m, const Scenario& sc, const FitConfig& cfg,
                                       double h = 1e-5) {
    auto params = m.parameters();
    const auto theta = params.flatten();
    std::vector<double> g(theta.size());
    auto at = [&](std::size_t k, double delta) {
        auto t = theta;
        t[k] += delta;
        params.assign_flat(t);
        return loss(m.with_parameters(params), sc, cfg).total;
    };
    for (std::size_t k = 0; k < theta.size(); ++k) g[k] = (at(k, h) - at(k, -h)) / (2.0 * h);
    return g;
}

/// |a - b| / max(|a|, |b|, floor): relative error with an absolute floor for
/// entries that are zero up to finite-difference noise.
inline double rel_error(double a, double b, double floor = 1e-6) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace fhm::testing
