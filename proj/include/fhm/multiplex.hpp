#pragma once

// Fuzzy hierarchical multiplex: an outer weighted graph whose nodes each nest
// an inner FCM, optional concept-to-concept edges across outer nodes, and the
// coupled two-layer update
//
//   z_i(t+1) = f(z_i(t), Y(t))          inner sweep, every node reads state t
//   Y(t+1)   = w(Y(t), {z_i(t+1)})      outer sweep, reads the fresh inners
//
// with f and w affine-then-squash:
//
//   z_i[c](t+1) = squash(sum_j W_i[j][c] z_i[j] + x_i[c] + d_i[c] Y_i + I_i[c])
//   Y_i(t+1)    = squash(sum_j V[j][i] Y_j + b_i + agg(z_i(t+1)))
//
// I_i[c] is the weighted sum of source-concept activations over inter-layer
// edges that end at (i, c). Inner nodes are kept in plain index order.

#include <cstddef>
#include <vector>

#include "fhm/core.hpp"
#include "fhm/fcm.hpp"

namespace fhm {

enum class Aggregation { mean, max };

const char* to_string(Aggregation a) noexcept;
Aggregation aggregation_from_string(const std::string& s);

struct InterlayerEdge {
    std::size_t src_node = 0;
    std::size_t src_concept = 0;
    std::size_t dst_node = 0;
    std::size_t dst_concept = 0;
    double weight = 0.0;

    friend bool operator==(const InterlayerEdge&, const InterlayerEdge&) = default;
};

/// All trainable numbers of a multiplex, grouped by role. Also the shape of
/// the loss gradient.
struct MultiplexParameters {
    std::vector<Matrix> inner_weights;
    std::vector<std::vector<double>> external_inputs;
    std::vector<std::vector<double>> couplings;
    Matrix outer_weights;
    std::vector<double> outer_bias;
    std::vector<double> interlayer;

    /// Same shape, all zeros.
    MultiplexParameters zeros_like() const;
    std::size_t size() const noexcept;
    std::vector<double> flatten() const;
    void assign_flat(std::span<const double> flat);

    friend bool operator==(const MultiplexParameters&, const MultiplexParameters&) = default;
};

class Multiplex {
public:
    /// Validates every structural invariant; throws ArgumentError on the first
    /// violation. Inner FCMs must share the multiplex squashing function.
    Multiplex(Matrix outer_weights, std::vector<double> outer_bias, std::vector<Fcm> inner,
              std::vector<std::vector<double>> down_coupling,
              std::vector<Aggregation> up_aggregation, std::vector<InterlayerEdge> interlayer,
              SquashingFunction squash = {});

    std::size_t outer_size() const noexcept { return outer_weights_.rows(); }
    std::size_t inner_size(std::size_t i) const { return inner_.at(i).size(); }
    std::size_t total_concepts() const noexcept;

    const Matrix& outer_weights() const noexcept { return outer_weights_; }
    const std::vector<double>& outer_bias() const noexcept { return outer_bias_; }
    const std::vector<Fcm>& inner() const noexcept { return inner_; }
    const std::vector<std::vector<double>>& down_coupling() const noexcept { return coupling_; }
    const std::vector<Aggregation>& up_aggregation() const noexcept { return aggregation_; }
    const std::vector<InterlayerEdge>& interlayer() const noexcept { return interlayer_; }
    const SquashingFunction& squash() const noexcept { return squash_; }

    /// Indices into interlayer() of the edges ending at outer node i, in list order.
    const std::vector<std::size_t>& incoming_edges(std::size_t i) const { return incoming_.at(i); }

    MultiplexParameters parameters() const;

    /// Same topology with new numbers. Validation applies as in the constructor.
    Multiplex with_parameters(const MultiplexParameters& p) const;

    friend bool operator==(const Multiplex& a, const Multiplex& b) {
        return a.outer_weights_ == b.outer_weights_ && a.outer_bias_ == b.outer_bias_ &&
               a.inner_ == b.inner_ && a.coupling_ == b.coupling_ &&
               a.aggregation_ == b.aggregation_ && a.interlayer_ == b.interlayer_ &&
               a.squash_ == b.squash_;
    }

private:
    Matrix outer_weights_;
    std::vector<double> outer_bias_;
    std::vector<Fcm> inner_;
    std::vector<std::vector<double>> coupling_;
    std::vector<Aggregation> aggregation_;
    std::vector<InterlayerEdge> interlayer_;
    SquashingFunction squash_;
    std::vector<std::vector<std::size_t>> incoming_;
};

struct MultiplexState {
    ActivationVector outer;
    std::vector<ActivationVector> inners;
    /// Inter-layer signal per node and concept that produced `inners`; zeros
    /// for a state that was not produced by a step.
    std::vector<std::vector<double>> interlayer_input;

    friend bool operator==(const MultiplexState&, const MultiplexState&) = default;
};

/// State with the given activations and zero inter-layer input. Validates shape.
MultiplexState make_state(const Multiplex& m, ActivationVector outer,
                          std::vector<ActivationVector> inners);

/// Throws ArgumentError unless s has m's shape.
void check_state(const Multiplex& m, const MultiplexState& s);

/// Concatenation outer ++ inners[0] ++ inners[1] ++ ...
std::vector<double> flatten_state(const MultiplexState& s);

/// Mean or max of an activation vector.
double aggregate(Aggregation a, std::span<const double> z);

/// I_i[c] for every concept of node i, computed from state s.
std::vector<double> interlayer_input(const Multiplex& m, const MultiplexState& s, std::size_t i);

/// Order-independent sum: terms are sorted by value and added in that order,
/// so relabeling the outer nodes leaves the result bit-identical.
double ordered_sum(std::vector<double> terms);

/// sum_j V[j][i] Y_j as an order-independent sum.
double outer_incoming(const Multiplex& m, std::span<const double> outer, std::size_t i);

ActivationVector inner_update(const Multiplex& m, const MultiplexState& s, std::size_t i);

ActivationVector outer_update(const Multiplex& m, const MultiplexState& s,
                              const std::vector<ActivationVector>& new_inners);

MultiplexState multiplex_step(const Multiplex& m, const MultiplexState& s);

RunResult<MultiplexState> multiplex_run(const Multiplex& m, const MultiplexState& s0,
                                        std::size_t max_steps, double tol);

/// Relabel outer nodes: node i of the result is node perm[i] of m. Edge list
/// order is preserved with endpoints remapped.
Multiplex permute_outer(const Multiplex& m, std::span<const std::size_t> perm);
MultiplexState permute_state(const MultiplexState& s, std::span<const std::size_t> perm);

}  // namespace fhm
