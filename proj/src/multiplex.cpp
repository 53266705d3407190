#include "fhm/multiplex.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fhm/detail/iterate.hpp"
#include "fhm/kernels.hpp"

namespace fhm {
namespace {

void check_weight(double w, const char* what) {
    if (!(w >= -1.0 && w <= 1.0)) {
        throw ArgumentError(std::string(what) + " outside [-1,1]");
    }
}

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw ArgumentError(std::string(what) + " not finite");
}

}  // namespace

const char* to_string(Aggregation a) noexcept {
    return a == Aggregation::max ? "max" : "mean";
}

Aggregation aggregation_from_string(const std::string& s) {
    if (s == "mean") return Aggregation::mean;
    if (s == "max") return Aggregation::max;
    throw ArgumentError("unknown aggregation '" + s + "' (expected mean or max)");
}

// ---------------------------------------------------------------------------
// MultiplexParameters
// ---------------------------------------------------------------------------

MultiplexParameters MultiplexParameters::zeros_like() const {
    MultiplexParameters z;
    for (const auto& w : inner_weights) z.inner_weights.emplace_back(w.rows(), w.cols(), 0.0);
    for (const auto& x : external_inputs) z.external_inputs.emplace_back(x.size(), 0.0);
    for (const auto& d : couplings) z.couplings.emplace_back(d.size(), 0.0);
    z.outer_weights = Matrix(outer_weights.rows(), outer_weights.cols(), 0.0);
    z.outer_bias.assign(outer_bias.size(), 0.0);
    z.interlayer.assign(interlayer.size(), 0.0);
    return z;
}

std::size_t MultiplexParameters::size() const noexcept {
    std::size_t n = outer_weights.data().size() + outer_bias.size() + interlayer.size();
    for (const auto& w : inner_weights) n += w.data().size();
    for (const auto& x : external_inputs) n += x.size();
    for (const auto& d : couplings) n += d.size();
    return n;
}

std::vector<double> MultiplexParameters::flatten() const {
    std::vector<double> out;
    out.reserve(size());
    auto put = [&](std::span<const double> s) { out.insert(out.end(), s.begin(), s.end()); };
    for (const auto& w : inner_weights) put(w.data());
    for (const auto& x : external_inputs) put(x);
    for (const auto& d : couplings) put(d);
    put(outer_weights.data());
    put(outer_bias);
    put(interlayer);
    return out;
}

void MultiplexParameters::assign_flat(std::span<const double> flat) {
    if (flat.size() != size()) throw ArgumentError("parameter vector length mismatch");
    std::size_t k = 0;
    auto take = [&](std::span<double> s) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(k), s.size(), s.begin());
        k += s.size();
    };
    for (auto& w : inner_weights) take(w.data());
    for (auto& x : external_inputs) take(x);
    for (auto& d : couplings) take(d);
    take(outer_weights.data());
    take(outer_bias);
    take(interlayer);
}

// ---------------------------------------------------------------------------
// Multiplex
// ---------------------------------------------------------------------------

Multiplex::Multiplex(Matrix outer_weights, std::vector<double> outer_bias, std::vector<Fcm> inner,
                     std::vector<std::vector<double>> down_coupling,
                     std::vector<Aggregation> up_aggregation,
                     std::vector<InterlayerEdge> interlayer, SquashingFunction squash)
    : outer_weights_(std::move(outer_weights)),
      outer_bias_(std::move(outer_bias)),
      inner_(std::move(inner)),
      coupling_(std::move(down_coupling)),
      aggregation_(std::move(up_aggregation)),
      interlayer_(std::move(interlayer)),
      squash_(squash) {
    const std::size_t n = outer_weights_.rows();
    if (n == 0 || !outer_weights_.square()) {
        throw ArgumentError("outer weights must be a non-empty square matrix");
    }
    for (double w : outer_weights_.data()) check_weight(w, "outer weight");
    if (outer_bias_.size() != n) throw ArgumentError("outer bias length != outer node count");
    for (double b : outer_bias_) check_finite(b, "outer bias");
    if (inner_.size() != n) throw ArgumentError("inner FCM count != outer node count");
    if (coupling_.size() != n) throw ArgumentError("down coupling count != outer node count");
    if (aggregation_.size() != n) throw ArgumentError("aggregation count != outer node count");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(inner_[i].squash() == squash_)) {
            throw ArgumentError("inner FCM " + std::to_string(i) +
                                " squashing differs from the multiplex");
        }
        if (coupling_[i].size() != inner_[i].size()) {
            throw ArgumentError("down coupling " + std::to_string(i) +
                                " length != inner concept count");
        }
        for (double d : coupling_[i]) check_weight(d, "down coupling");
    }
    incoming_.assign(n, {});
    for (std::size_t e = 0; e < interlayer_.size(); ++e) {
        const auto& edge = interlayer_[e];
        if (edge.src_node >= n || edge.dst_node >= n) {
            throw ArgumentError("inter-layer edge " + std::to_string(e) + " node out of range");
        }
        if (edge.src_node == edge.dst_node) {
            throw ArgumentError("inter-layer edge " + std::to_string(e) +
                                " does not cross outer nodes");
        }
        if (edge.src_concept >= inner_[edge.src_node].size() ||
            edge.dst_concept >= inner_[edge.dst_node].size()) {
            throw ArgumentError("inter-layer edge " + std::to_string(e) +
                                " concept out of range");
        }
        check_weight(edge.weight, "inter-layer weight");
        incoming_[edge.dst_node].push_back(e);
    }
}

std::size_t Multiplex::total_concepts() const noexcept {
    std::size_t n = 0;
    for (const auto& f : inner_) n += f.size();
    return n;
}

MultiplexParameters Multiplex::parameters() const {
    MultiplexParameters p;
    for (const auto& f : inner_) {
        p.inner_weights.push_back(f.weights());
        p.external_inputs.push_back(f.external_input());
    }
    p.couplings = coupling_;
    p.outer_weights = outer_weights_;
    p.outer_bias = outer_bias_;
    for (const auto& e : interlayer_) p.interlayer.push_back(e.weight);
    return p;
}

Multiplex Multiplex::with_parameters(const MultiplexParameters& p) const {
    const std::size_t n = outer_size();
    if (p.inner_weights.size() != n || p.external_inputs.size() != n ||
        p.couplings.size() != n || p.interlayer.size() != interlayer_.size()) {
        throw ArgumentError("parameter set does not match multiplex topology");
    }
    std::vector<Fcm> inner;
    inner.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (p.inner_weights[i].rows() != inner_[i].size()) {
            throw ArgumentError("inner weight shape does not match topology");
        }
        inner.emplace_back(p.inner_weights[i], p.external_inputs[i], squash_);
    }
    auto edges = interlayer_;
    for (std::size_t e = 0; e < edges.size(); ++e) edges[e].weight = p.interlayer[e];
    return Multiplex(p.outer_weights, p.outer_bias, std::move(inner), p.couplings, aggregation_,
                     std::move(edges), squash_);
}

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

MultiplexState make_state(const Multiplex& m, ActivationVector outer,
                          std::vector<ActivationVector> inners) {
    MultiplexState s{std::move(outer), std::move(inners), {}};
    for (std::size_t i = 0; i < s.inners.size(); ++i) {
        s.interlayer_input.emplace_back(s.inners[i].size(), 0.0);
    }
    check_state(m, s);
    return s;
}

void check_state(const Multiplex& m, const MultiplexState& s) {
    const std::size_t n = m.outer_size();
    if (s.outer.size() != n || s.inners.size() != n || s.interlayer_input.size() != n) {
        throw ArgumentError("state outer shape does not match multiplex");
    }
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    for (double y : s.outer) {
        if (!in_unit(y)) throw ArgumentError("outer activation outside [0,1]");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (s.inners[i].size() != m.inner_size(i) ||
            s.interlayer_input[i].size() != m.inner_size(i)) {
            throw ArgumentError("state inner " + std::to_string(i) + " length mismatch");
        }
        for (double z : s.inners[i]) {
            if (!in_unit(z)) throw ArgumentError("inner activation outside [0,1]");
        }
    }
}

std::vector<double> flatten_state(const MultiplexState& s) {
    std::vector<double> out(s.outer);
    for (const auto& z : s.inners) out.insert(out.end(), z.begin(), z.end());
    return out;
}

// ---------------------------------------------------------------------------
// Dynamics
// ---------------------------------------------------------------------------

double aggregate(Aggregation a, std::span<const double> z) {
    if (z.empty()) throw ArgumentError("aggregate of an empty activation vector");
    if (a == Aggregation::max) return *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += v;
    return sum / static_cast<double>(z.size());
}

std::vector<double> interlayer_input(const Multiplex& m, const MultiplexState& s, std::size_t i) {
    std::vector<double> in(m.inner_size(i), 0.0);
    for (std::size_t e : m.incoming_edges(i)) {
        const auto& edge = m.interlayer()[e];
        in[edge.dst_concept] += edge.weight * s.inners[edge.src_node][edge.src_concept];
    }
    return in;
}

double ordered_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    double acc = 0.0;
    for (double t : terms) acc += t;
    return acc;
}

double outer_incoming(const Multiplex& m, std::span<const double> outer, std::size_t i) {
    const std::size_t n = m.outer_size();
    std::vector<double> terms(n);
    for (std::size_t j = 0; j < n; ++j) terms[j] = m.outer_weights()(j, i) * outer[j];
    return ordered_sum(std::move(terms));
}

namespace {

ActivationVector inner_update_with(const Multiplex& m, const MultiplexState& s, std::size_t i,
                                   std::span<const double> inter) {
    const Fcm& f = m.inner()[i];
    const std::size_t n = f.size();
    ActivationVector out(n, 0.0);
    kernels::matvec_transposed_acc(f.weights().data(), n, n, s.inners[i], out);
    const double y = s.outer[i];
    for (std::size_t c = 0; c < n; ++c) {
        const double pre = out[c] + f.external_input()[c] + m.down_coupling()[i][c] * y + inter[c];
        out[c] = squash(m.squash(), pre);
    }
    return out;
}

}  // namespace

ActivationVector inner_update(const Multiplex& m, const MultiplexState& s, std::size_t i) {
    if (i >= m.outer_size()) throw ArgumentError("inner_update: node index out of range");
    check_state(m, s);
    return inner_update_with(m, s, i, interlayer_input(m, s, i));
}

ActivationVector outer_update(const Multiplex& m, const MultiplexState& s,
                              const std::vector<ActivationVector>& new_inners) {
    const std::size_t n = m.outer_size();
    if (new_inners.size() != n || s.outer.size() != n) {
        throw ArgumentError("outer_update: dimension mismatch");
    }
    ActivationVector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (new_inners[i].size() != m.inner_size(i)) {
            throw ArgumentError("outer_update: inner activation length mismatch");
        }
        const double pre = outer_incoming(m, s.outer, i) + m.outer_bias()[i] +
                           aggregate(m.up_aggregation()[i], new_inners[i]);
        y[i] = squash(m.squash(), pre);
    }
    return y;
}

MultiplexState multiplex_step(const Multiplex& m, const MultiplexState& s) {
    check_state(m, s);
    const std::size_t n = m.outer_size();
    MultiplexState next;
    next.inners.reserve(n);
    next.interlayer_input.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto inter = interlayer_input(m, s, i);
        next.inners.push_back(inner_update_with(m, s, i, inter));
        next.interlayer_input.push_back(std::move(inter));
    }
    next.outer = outer_update(m, s, next.inners);
    return next;
}

RunResult<MultiplexState> multiplex_run(const Multiplex& m, const MultiplexState& s0,
                                        std::size_t max_steps, double tol) {
    check_state(m, s0);
    return detail::iterate(
        s0, [&](const MultiplexState& s) { return multiplex_step(m, s); }, flatten_state,
        max_steps, tol);
}

// ---------------------------------------------------------------------------
// Relabeling
// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> perm, std::size_t n) {
    if (perm.size() != n) throw ArgumentError("permutation length mismatch");
    std::vector<std::size_t> inv(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (perm[i] >= n || inv[perm[i]] != n) throw ArgumentError("not a permutation");
        inv[perm[i]] = i;
    }
    return inv;
}

}  // namespace

Multiplex permute_outer(const Multiplex& m, std::span<const std::size_t> perm) {
    const std::size_t n = m.outer_size();
    const auto inv = inverse_permutation(perm, n);
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) v(i, j) = m.outer_weights()(perm[i], perm[j]);
    std::vector<double> bias(n);
    std::vector<Fcm> inner;
    std::vector<std::vector<double>> coupling(n);
    std::vector<Aggregation> agg(n);
    for (std::size_t i = 0; i < n; ++i) {
        bias[i] = m.outer_bias()[perm[i]];
        inner.push_back(m.inner()[perm[i]]);
        coupling[i] = m.down_coupling()[perm[i]];
        agg[i] = m.up_aggregation()[perm[i]];
    }
    auto edges = m.interlayer();
    for (auto& e : edges) {
        e.src_node = inv[e.src_node];
        e.dst_node = inv[e.dst_node];
    }
    return Multiplex(std::move(v), std::move(bias), std::move(inner), std::move(coupling),
                     std::move(agg), std::move(edges), m.squash());
}

MultiplexState permute_state(const MultiplexState& s, std::span<const std::size_t> perm) {
    const std::size_t n = s.outer.size();
    inverse_permutation(perm, n);
    MultiplexState out;
    for (std::size_t i = 0; i < n; ++i) {
        out.outer.push_back(s.outer[perm[i]]);
        out.inners.push_back(s.inners[perm[i]]);
        out.interlayer_input.push_back(s.interlayer_input[perm[i]]);
    }
    return out;
}

}  // namespace fhm
