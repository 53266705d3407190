#pragma once

// Metric readout, node contribution and ranking, and the entropy diagnostic.

#include <cstddef>
#include <span>
#include <vector>

#include "fhm/core.hpp"
#include "fhm/fcm.hpp"
#include "fhm/multiplex.hpp"
#include "fhm/scenario.hpp"

namespace fhm {

/// Throws ArgumentError unless the readout map is total and in range for m.
void check_metric_set(const Multiplex& m, const MetricSet& ms);

/// value(i,k) = s.inners[i][readout_map[i][k]]. Pure projection.
Matrix metric_readout(const Multiplex& m, const MultiplexState& s, const MetricSet& ms);

/// 10 * (alpha * alignment + (1 - alpha) * influence), where alignment is the
/// mean of 1 - |metric_k - target_k|.
double contribution(std::span<const double> node_metrics, std::span<const double> targets,
                    double influence, double alpha);

/// Per-node structural influence: total absolute weight on edges to and from
/// other outer nodes, divided by the largest such total (all zero if none).
std::vector<double> outer_influence(const Multiplex& m);

/// Shannon entropy (nats) of the activations normalized to sum to one.
double inner_entropy(std::span<const double> z);

struct NodeReport {
    std::size_t node = 0;
    std::vector<double> metric_values;
    double contribution = 0.0;
    double entropy = 0.0;
};

std::vector<NodeReport> node_reports(const Multiplex& m, const MultiplexState& s,
                                     const Scenario& scenario, double alpha = 0.5);

/// Node indices by contribution, descending; ties by ascending node index.
std::vector<std::size_t> rank_nodes(std::span<const NodeReport> reports);
std::vector<std::size_t> rank_by_contribution(std::span<const double> contributions);

}  // namespace fhm
