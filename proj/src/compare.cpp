#include "fhm/compare.hpp"

namespace fhm {

Multiplex embedding_start(const Multiplex& m) {
    const std::size_t n = m.outer_size();
    auto p = m.parameters();
    for (auto& d : p.couplings) std::fill(d.begin(), d.end(), 0.0);
    std::vector<Fcm> inner;
    for (std::size_t i = 0; i < n; ++i) {
        inner.emplace_back(p.inner_weights[i], p.external_inputs[i], m.squash());
    }
    std::vector<InterlayerEdge> edges;
    for (std::size_t dst = 0; dst < n; ++dst)
        for (std::size_t dc = 0; dc < m.inner_size(dst); ++dc)
            for (std::size_t src = 0; src < n; ++src) {
                if (src == dst) continue;
                for (std::size_t sc = 0; sc < m.inner_size(src); ++sc) {
                    edges.push_back({src, sc, dst, dc, 0.0});
                }
            }
    return Multiplex(p.outer_weights, p.outer_bias, std::move(inner), p.couplings,
                     m.up_aggregation(), std::move(edges), m.squash());
}

FlatBaseline flat_baseline(const Multiplex& m, const Scenario& sc) {
    check_compatible(m, sc);
    const std::size_t n = m.outer_size();
    const std::size_t total = m.total_concepts();
    std::vector<std::size_t> offset(n, 0);
    for (std::size_t i = 1; i < n; ++i) offset[i] = offset[i - 1] + m.inner_size(i - 1);

    Matrix w(total, total, 0.0);
    std::vector<double> x;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& f = m.inner()[i];
        for (std::size_t r = 0; r < f.size(); ++r)
            for (std::size_t c = 0; c < f.size(); ++c) w(offset[i] + r, offset[i] + c) = f.weights()(r, c);
        x.insert(x.end(), f.external_input().begin(), f.external_input().end());
    }
    std::vector<Fcm> inner;
    inner.emplace_back(std::move(w), std::move(x), m.squash());
    Multiplex model(Matrix(1, 1, 0.0), {0.0}, std::move(inner), {std::vector<double>(total, 0.0)},
                    {Aggregation::mean}, {}, m.squash());

    const std::size_t k = sc.metrics.count();
    Scenario flat;
    flat.name = sc.name + "/flat";
    flat.seed = sc.seed;
    flat.topology = {1, {total}};
    flat.inputs = sc.inputs;
    std::vector<double> z0;
    for (const auto& z : sc.initial_state.inners) z0.insert(z0.end(), z.begin(), z.end());
    flat.initial_state = make_state(model, {0.5}, {std::move(z0)});
    flat.targets = Matrix(1, n * k);
    std::vector<std::size_t> row;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t q = 0; q < k; ++q) {
            flat.targets(0, i * k + q) = sc.targets(i, q);
            flat.metrics.names.push_back(sc.metrics.names[q] + "@" + std::to_string(i));
            row.push_back(offset[i] + sc.metrics.readout_map[i][q]);
        }
    flat.metrics.readout_map.push_back(std::move(row));
    return {std::move(model), std::move(flat)};
}

Comparison compare_fhm_fcm(const Scenario& scenario, const FitConfig& cfg) {
    const Multiplex fhm0 = embedding_start(build_multiplex(scenario, cfg.seed));
    const FlatBaseline flat = flat_baseline(fhm0, scenario);

    // Both sides minimize the same plain L2 fit term; the alignment penalty
    // has no counterpart in a flat map.
    FitConfig fhm_cfg = cfg;
    fhm_cfg.beta = 0.0;
    FitConfig flat_cfg = fhm_cfg;
    flat_cfg.trainable = kInnerWeights & cfg.trainable;

    Comparison out{0.0, 0.0, 0.0, 0.0, fit(fhm0, scenario, fhm_cfg),
                   fit(flat.model, flat.scenario, flat_cfg)};
    out.fhm_initial_loss = loss(fhm0, scenario, fhm_cfg).fit_term;
    out.fcm_initial_loss = loss(flat.model, flat.scenario, flat_cfg).fit_term;
    out.fhm_final_loss = out.fhm.final_loss.fit_term;
    out.fcm_final_loss = out.fcm.final_loss.fit_term;
    return out;
}

}  // namespace fhm
