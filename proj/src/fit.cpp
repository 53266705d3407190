#include "fhm/fit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "fhm/kernels.hpp"
#include "fhm/metrics.hpp"

namespace fhm {

double alignment_residual(double u, double v, double z, double target_sum) {
    return (v + 1.0) * (u + 1.0) + 2.0 * z - target_sum;
}

ResidualGrad alignment_residual_grad(double u, double v, double /*z*/, double /*target_sum*/) {
    return {v + 1.0, u + 1.0, 2.0};
}

void FitConfig::validate() const {
    if (!(step_size > 0.0) || !std::isfinite(step_size)) {
        throw ArgumentError("step_size must be positive");
    }
    if (max_iters == 0) throw ArgumentError("max_iters must be positive");
    if (!(grad_tol > 0.0)) throw ArgumentError("grad_tol must be positive");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ArgumentError("beta must be non-negative");
    if (settle_steps == 0) throw ArgumentError("settle_steps must be positive");
    if (!(armijo > 0.0 && armijo < 1.0)) throw ArgumentError("armijo constant must be in (0,1)");
}

const char* to_string(FitStatus s) noexcept {
    return s == FitStatus::converged ? "converged" : "budget_exhausted";
}

namespace {

std::vector<double> row_sums(const Matrix& m) {
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t k = 0; k < m.cols(); ++k) out[i] += m(i, k);
    return out;
}

double sum_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

/// d agg / d z_c, written into out.
void aggregate_grad(Aggregation a, std::span<const double> z, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    if (a == Aggregation::max) {
        out[static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin())] = 1.0;
    } else {
        const double w = 1.0 / static_cast<double>(z.size());
        std::fill(out.begin(), out.end(), w);
    }
}

std::vector<MultiplexState> trajectory(const Multiplex& m, const Scenario& sc,
                                       const FitConfig& cfg) {
    std::vector<MultiplexState> traj;
    traj.reserve(cfg.settle_steps + 1);
    traj.push_back(sc.initial_state);
    for (std::size_t t = 0; t < cfg.settle_steps; ++t) {
        traj.push_back(multiplex_step(m, traj.back()));
    }
    return traj;
}

LossValue evaluate(const Multiplex& m, const Scenario& sc, const FitConfig& cfg,
                   const MultiplexState& last) {
    const std::size_t n = m.outer_size();
    const auto& map = sc.metrics.readout_map;
    LossValue v;
    double fit_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < sc.metrics.count(); ++k) {
            const double d = last.inners[i][map[i][k]] - sc.targets(i, k);
            fit_sum += d * d;
        }
    }
    v.fit_term = 0.5 * fit_sum;
    const auto target_sums = row_sums(sc.targets);
    double align_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = alignment_residual(last.outer[i], aggregate(m.up_aggregation()[i], last.inners[i]),
                                      sum_of(last.interlayer_input[i]), target_sums[i]);
        align_sum += r * r;
    }
    v.align_term = 0.5 * align_sum;
    v.total = v.fit_term + cfg.beta * v.align_term;
    return v;
}

void add_into(MultiplexParameters& into, const MultiplexParameters& g) {
    auto a = into.flatten();
    const auto b = g.flatten();
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
    into.assign_flat(a);
}

}  // namespace

MultiplexState settle(const Multiplex& m, const Scenario& scenario, const FitConfig& cfg) {
    check_compatible(m, scenario);
    MultiplexState s = scenario.initial_state;
    for (std::size_t t = 0; t < cfg.settle_steps; ++t) s = multiplex_step(m, s);
    return s;
}

LossValue loss(const Multiplex& m, const Scenario& scenario, const FitConfig& cfg) {
    return evaluate(m, scenario, cfg, settle(m, scenario, cfg));
}

LossAndGrad loss_grad(const Multiplex& m, const Scenario& sc, const FitConfig& cfg) {
    check_compatible(m, sc);
    const auto traj = trajectory(m, sc, cfg);
    const std::size_t T = cfg.settle_steps;
    const std::size_t n = m.outer_size();
    const double lambda = m.squash().steepness;
    const MultiplexState& last = traj[T];

    LossAndGrad out{evaluate(m, sc, cfg, last), m.parameters().zeros_like()};
    MultiplexParameters& g = out.grad;

    // Adjoints of the state at step T.
    std::vector<double> g_outer(n, 0.0);
    std::vector<std::vector<double>> g_inner(n);
    std::vector<std::vector<double>> g_inter_final(n);
    for (std::size_t i = 0; i < n; ++i) {
        g_inner[i].assign(m.inner_size(i), 0.0);
        g_inter_final[i].assign(m.inner_size(i), 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < sc.metrics.count(); ++k) {
            const std::size_t c = sc.metrics.readout_map[i][k];
            g_inner[i][c] += last.inners[i][c] - sc.targets(i, k);
        }
    }
    if (cfg.beta != 0.0) {
        const auto target_sums = row_sums(sc.targets);
        std::vector<double> dagg;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = last.outer[i];
            const double v = aggregate(m.up_aggregation()[i], last.inners[i]);
            const double z = sum_of(last.interlayer_input[i]);
            const double r = cfg.beta * alignment_residual(u, v, z, target_sums[i]);
            const auto pr = alignment_residual_grad(u, v, z, target_sums[i]);
            g_outer[i] += r * pr.du;
            dagg.assign(m.inner_size(i), 0.0);
            aggregate_grad(m.up_aggregation()[i], last.inners[i], dagg);
            for (std::size_t c = 0; c < dagg.size(); ++c) g_inner[i][c] += r * pr.dv * dagg[c];
            for (auto& gi : g_inter_final[i]) gi = r * pr.dz;
        }
    }

    std::vector<double> dagg, gp, back, g_inter;
    for (std::size_t t = T; t >= 1; --t) {
        const MultiplexState& prev = traj[t - 1];
        const MultiplexState& cur = traj[t];
        std::vector<double> g_outer_prev(n, 0.0);
        std::vector<std::vector<double>> g_inner_prev(n);
        for (std::size_t i = 0; i < n; ++i) g_inner_prev[i].assign(m.inner_size(i), 0.0);

        // Outer: Y_i = squash(sum_j V[j][i] Y_j(prev) + b_i + agg(z_i(cur))).
        for (std::size_t i = 0; i < n; ++i) {
            const double y = cur.outer[i];
            const double gq = g_outer[i] * squash_grad_from_output(m.squash(), y);
            g.outer_bias[i] += gq;
            for (std::size_t j = 0; j < n; ++j) {
                g.outer_weights(j, i) += gq * prev.outer[j];
                g_outer_prev[j] += m.outer_weights()(j, i) * gq;
            }
            dagg.assign(m.inner_size(i), 0.0);
            aggregate_grad(m.up_aggregation()[i], cur.inners[i], dagg);
            for (std::size_t c = 0; c < dagg.size(); ++c) g_inner[i][c] += gq * dagg[c];
        }

        // Inner: z_i[c] = squash(sum_j W_i[j][c] z_i[j](prev) + x_i[c] + d_i[c] Y_i(prev) + I_i[c]).
        for (std::size_t i = 0; i < n; ++i) {
            const Fcm& f = m.inner()[i];
            const std::size_t ni = f.size();
            gp.assign(ni, 0.0);
            for (std::size_t c = 0; c < ni; ++c) {
                gp[c] = g_inner[i][c] * lambda * cur.inners[i][c] * (1.0 - cur.inners[i][c]);
            }
            kernels::rank1_acc(g.inner_weights[i].data(), ni, ni, prev.inners[i], gp);
            back.resize(ni);
            kernels::matvec(f.weights().data(), ni, ni, gp, back);
            for (std::size_t j = 0; j < ni; ++j) g_inner_prev[i][j] += back[j];
            for (std::size_t c = 0; c < ni; ++c) {
                g.external_inputs[i][c] += gp[c];
                g.couplings[i][c] += gp[c] * prev.outer[i];
                g_outer_prev[i] += gp[c] * m.down_coupling()[i][c];
            }
            g_inter.assign(gp.begin(), gp.end());
            if (t == T) {
                for (std::size_t c = 0; c < ni; ++c) g_inter[c] += g_inter_final[i][c];
            }
            for (std::size_t e : m.incoming_edges(i)) {
                const auto& edge = m.interlayer()[e];
                const double ge = g_inter[edge.dst_concept];
                g.interlayer[e] += ge * prev.inners[edge.src_node][edge.src_concept];
                g_inner_prev[edge.src_node][edge.src_concept] += edge.weight * ge;
            }
        }
        g_outer = std::move(g_outer_prev);
        g_inner = std::move(g_inner_prev);
    }
    return out;
}

LossAndGrad loss_grad(const Multiplex& m, std::span<const Scenario> batch, const FitConfig& cfg,
                      std::size_t workers) {
    if (batch.empty()) throw ArgumentError("loss_grad over an empty batch");
    std::vector<LossAndGrad> parts(batch.size(),
                                   LossAndGrad{{}, m.parameters().zeros_like()});
    workers = std::clamp<std::size_t>(workers, 1, batch.size());
    if (workers == 1) {
        for (std::size_t b = 0; b < batch.size(); ++b) parts[b] = loss_grad(m, batch[b], cfg);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t b = w; b < batch.size(); b += workers) {
                        parts[b] = loss_grad(m, batch[b], cfg);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    LossAndGrad total{{}, m.parameters().zeros_like()};
    for (const auto& p : parts) {
        total.value.total += p.value.total;
        total.value.fit_term += p.value.fit_term;
        total.value.align_term += p.value.align_term;
        add_into(total.grad, p.grad);
    }
    return total;
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

namespace {

struct ParamMask {
    std::vector<char> trainable;
    std::vector<char> bounded;
};

ParamMask make_mask(const MultiplexParameters& p, unsigned groups) {
    ParamMask mask;
    auto put = [&](std::size_t count, unsigned group, bool bounded) {
        mask.trainable.insert(mask.trainable.end(), count, (groups & group) != 0);
        mask.bounded.insert(mask.bounded.end(), count, bounded);
    };
    for (const auto& w : p.inner_weights) put(w.data().size(), kInnerWeights, true);
    for (const auto& x : p.external_inputs) put(x.size(), kExternalInputs, false);
    for (const auto& d : p.couplings) put(d.size(), kCouplings, true);
    put(p.outer_weights.data().size(), kOuterWeights, true);
    put(p.outer_bias.size(), kOuterBias, false);
    put(p.interlayer.size(), kInterlayer, true);
    return mask;
}

void require_finite(const LossValue& v, std::size_t iteration) {
    if (!std::isfinite(v.total)) throw NumericalError("non-finite loss", iteration);
}

void require_finite(std::span<const double> grad, std::size_t iteration) {
    for (double g : grad)
        if (!std::isfinite(g)) throw NumericalError("non-finite gradient", iteration);
}

}  // namespace

FitResult fit(const Multiplex& m0, const Scenario& scenario, const FitConfig& cfg) {
    cfg.validate();
    check_compatible(m0, scenario);

    MultiplexParameters params = m0.parameters();
    const ParamMask mask = make_mask(params, cfg.trainable);
    std::vector<double> theta = params.flatten();

    Multiplex current = m0;
    LossAndGrad lg = loss_grad(current, scenario, cfg);
    require_finite(lg.value, 0);

    FitResult result{current, {lg.value.total}, lg.value, {}, FitStatus::budget_exhausted, 0};

    std::vector<double> g(theta.size()), trial(theta.size());
    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        const auto raw = lg.grad.flatten();
        require_finite(raw, iter);
        double pg_norm = 0.0;
        for (std::size_t k = 0; k < theta.size(); ++k) {
            g[k] = mask.trainable[k] ? raw[k] : 0.0;
            double pg = g[k];
            if (mask.bounded[k] && ((theta[k] >= 1.0 && pg < 0.0) || (theta[k] <= -1.0 && pg > 0.0))) {
                pg = 0.0;
            }
            pg_norm = std::max(pg_norm, std::abs(pg));
        }
        if (pg_norm < cfg.grad_tol) {
            result.status = FitStatus::converged;
            break;
        }

        bool accepted = false;
        double alpha = cfg.step_size;
        LossValue trial_value;
        for (std::size_t h = 0; h <= cfg.max_halvings; ++h, alpha *= 0.5) {
            double slope = 0.0;
            for (std::size_t k = 0; k < theta.size(); ++k) {
                double v = theta[k] - alpha * g[k];
                if (mask.bounded[k]) v = std::clamp(v, -1.0, 1.0);
                trial[k] = v;
                slope += g[k] * (v - theta[k]);
            }
            if (!(slope < 0.0)) break;
            params.assign_flat(trial);
            const Multiplex candidate = m0.with_parameters(params);
            trial_value = loss(candidate, scenario, cfg);
            require_finite(trial_value, iter + 1);
            if (trial_value.total <= lg.value.total + cfg.armijo * slope &&
                trial_value.total < lg.value.total) {
                accepted = true;
                current = candidate;
                break;
            }
        }
        if (!accepted) {
            // No decrease representable at this point.
            result.status = FitStatus::converged;
            break;
        }
        theta = trial;
        lg = loss_grad(current, scenario, cfg);
        result.loss_trace.push_back(lg.value.total);
        result.iters = iter + 1;
    }

    result.fitted = current;
    result.final_loss = lg.value;
    result.final_state = settle(current, scenario, cfg);
    return result;
}

// ---------------------------------------------------------------------------
// Model construction
// ---------------------------------------------------------------------------

Multiplex build_multiplex(const Scenario& sc, std::uint64_t seed, SquashingFunction squash) {
    if (sc.multiplex) return *sc.multiplex;
    validate(sc);
    std::mt19937_64 rng(seed);
    auto draw = [&] { return unit_draw(rng()) - 0.5; };

    const std::size_t n = sc.topology.outer_n;
    std::vector<Fcm> inner;
    std::vector<std::vector<double>> coupling(n);
    std::size_t offset = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ni = sc.topology.inner_n[i];
        Matrix w(ni, ni);
        for (double& v : w.data()) v = draw();
        std::vector<double> x(ni);
        for (std::size_t c = 0; c < ni; ++c) x[c] = sc.inputs[offset + c].midpoint();
        offset += ni;
        inner.emplace_back(std::move(w), std::move(x), squash);
        coupling[i].resize(ni);
        for (double& d : coupling[i]) d = draw();
    }
    Matrix outer(n, n);
    for (double& v : outer.data()) v = draw();

    std::vector<InterlayerEdge> edges;
    for (std::size_t dst = 0; dst < n; ++dst)
        for (std::size_t dc = 0; dc < sc.topology.inner_n[dst]; ++dc)
            for (std::size_t src = 0; src < n; ++src) {
                if (src == dst) continue;
                for (std::size_t scn = 0; scn < sc.topology.inner_n[src]; ++scn) {
                    edges.push_back({src, scn, dst, dc, draw()});
                }
            }

    return Multiplex(std::move(outer), std::vector<double>(n, 0.0), std::move(inner),
                     std::move(coupling), std::vector<Aggregation>(n, Aggregation::mean),
                     std::move(edges), squash);
}

FitResult fit_scenario(const Scenario& scenario, const FitConfig& cfg) {
    return fit(build_multiplex(scenario, cfg.seed), scenario, cfg);
}

Multiplex with_inputs(const Multiplex& m, std::span<const double> inputs) {
    if (inputs.size() != m.total_concepts()) {
        throw ArgumentError("input vector length != total concept count");
    }
    auto p = m.parameters();
    std::size_t k = 0;
    for (auto& x : p.external_inputs)
        for (double& v : x) v = inputs[k++];
    return m.with_parameters(p);
}

Matrix settled_metrics(const Multiplex& m, const Scenario& scenario, const FitConfig& cfg) {
    return metric_readout(m, settle(m, scenario, cfg), scenario.metrics);
}

// ---------------------------------------------------------------------------
// Interval propagation
// ---------------------------------------------------------------------------

IntervalPropagation propagate_intervals(const Multiplex& m, const Scenario& scenario,
                                        std::span<const FuzzyInterval> inputs,
                                        const FitConfig& cfg, std::size_t budget,
                                        std::span<const std::vector<double>> extra_samples) {
    if (budget < 2) throw ArgumentError("interval propagation budget must be at least 2");
    const std::size_t total = m.total_concepts();
    if (inputs.size() != total) throw ArgumentError("input intervals length != concept count");

    std::vector<std::size_t> fuzzy;
    for (std::size_t k = 0; k < total; ++k)
        if (!inputs[k].degenerate()) fuzzy.push_back(k);
    const std::size_t d = fuzzy.size();

    IntervalPropagation out;
    std::vector<double> base(total);
    for (std::size_t k = 0; k < total; ++k) base[k] = inputs[k].lo();

    if (d == 0) {
        out.samples.push_back(base);
    } else {
        std::mt19937_64 rng(cfg.seed);
        auto vertex = [&](const std::vector<bool>& hi) {
            auto s = base;
            for (std::size_t q = 0; q < d; ++q) s[fuzzy[q]] = hi[q] ? inputs[fuzzy[q]].hi() : inputs[fuzzy[q]].lo();
            return s;
        };
        const std::size_t room = std::max<std::size_t>(2, budget - 1);
        const bool exhaustive = d < 63 && (std::size_t{1} << d) <= room;
        const std::size_t n_vertex = exhaustive ? (std::size_t{1} << d) : room;

        std::set<std::vector<bool>> seen;
        auto add_vertex = [&](std::vector<bool> bits) {
            if (seen.insert(bits).second) out.samples.push_back(vertex(bits));
        };
        add_vertex(std::vector<bool>(d, false));
        add_vertex(std::vector<bool>(d, true));
        if (exhaustive) {
            for (std::size_t mask = 1; mask + 1 < n_vertex; ++mask) {
                std::vector<bool> bits(d);
                for (std::size_t q = 0; q < d; ++q) bits[q] = (mask >> q) & 1u;
                add_vertex(std::move(bits));
            }
        } else {
            while (out.samples.size() < n_vertex) {
                std::vector<bool> bits(d);
                for (std::size_t q = 0; q < d; ++q) bits[q] = (rng() >> 63) != 0;
                add_vertex(std::move(bits));
            }
        }
        if (out.samples.size() < budget) {
            auto mid = base;
            for (std::size_t k : fuzzy) mid[k] = inputs[k].midpoint();
            out.samples.push_back(std::move(mid));
        }
        while (out.samples.size() < budget) {
            auto s = base;
            for (std::size_t k : fuzzy) {
                s[k] = inputs[k].lo() + unit_draw(rng()) * inputs[k].width();
            }
            out.samples.push_back(std::move(s));
        }
    }
    for (const auto& extra : extra_samples) {
        if (extra.size() != total) throw ArgumentError("extra sample length != concept count");
        for (std::size_t k = 0; k < total; ++k) {
            if (!inputs[k].contains(extra[k])) {
                throw ArgumentError("extra sample lies outside the input intervals");
            }
        }
        out.samples.push_back(extra);
    }

    for (const auto& s : out.samples) {
        out.outputs.push_back(settled_metrics(with_inputs(m, s), scenario, cfg));
    }
    const std::size_t n = m.outer_size();
    const std::size_t metrics = scenario.metrics.count();
    out.intervals.assign(n, std::vector<FuzzyInterval>(metrics));
    std::vector<double> column(out.outputs.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < metrics; ++k) {
            for (std::size_t s = 0; s < out.outputs.size(); ++s) column[s] = out.outputs[s](i, k);
            out.intervals[i][k] = interval_hull(column);
        }
    }
    return out;
}

}  // namespace fhm
