#include "fhm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fhm {

void check_metric_set(const Multiplex& m, const MetricSet& ms) {
    if (ms.readout_map.size() != m.outer_size()) {
        throw ArgumentError("readout map must have one row per outer node");
    }
    for (std::size_t i = 0; i < ms.readout_map.size(); ++i) {
        if (ms.readout_map[i].size() != ms.count()) {
            throw ArgumentError("readout map row " + std::to_string(i) +
                                " does not cover every metric");
        }
        for (std::size_t c : ms.readout_map[i]) {
            if (c >= m.inner_size(i)) {
                throw ArgumentError("readout map row " + std::to_string(i) +
                                    " names a concept out of range");
            }
        }
    }
}

Matrix metric_readout(const Multiplex& m, const MultiplexState& s, const MetricSet& ms) {
    check_metric_set(m, ms);
    check_state(m, s);
    Matrix out(m.outer_size(), ms.count());
    for (std::size_t i = 0; i < m.outer_size(); ++i)
        for (std::size_t k = 0; k < ms.count(); ++k) out(i, k) = s.inners[i][ms.readout_map[i][k]];
    return out;
}

double contribution(std::span<const double> node_metrics, std::span<const double> targets,
                    double influence, double alpha) {
    if (node_metrics.empty() || node_metrics.size() != targets.size()) {
        throw ArgumentError("contribution: metric and target lengths differ or are empty");
    }
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(influence) || !unit(alpha)) {
        throw ArgumentError("contribution: influence and alpha must lie in [0,1]");
    }
    double alignment = 0.0;
    for (std::size_t k = 0; k < node_metrics.size(); ++k) {
        if (!unit(node_metrics[k]) || !unit(targets[k])) {
            throw ArgumentError("contribution: metric or target outside [0,1]");
        }
        alignment += 1.0 - std::abs(node_metrics[k] - targets[k]);
    }
    alignment /= static_cast<double>(node_metrics.size());
    return std::clamp(10.0 * (alpha * alignment + (1.0 - alpha) * influence), 0.0, 10.0);
}

std::vector<double> outer_influence(const Multiplex& m) {
    const std::size_t n = m.outer_size();
    std::vector<double> raw(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            raw[i] += std::abs(m.outer_weights()(i, j)) + std::abs(m.outer_weights()(j, i));
        }
    const double top = *std::max_element(raw.begin(), raw.end());
    if (top > 0.0)
        for (double& r : raw) r /= top;
    return raw;
}

double inner_entropy(std::span<const double> z) {
    double total = 0.0;
    for (double v : z) {
        if (!(v >= 0.0)) throw ArgumentError("inner_entropy: negative or NaN activation");
        total += v;
    }
    if (!(total > 0.0)) throw ArgumentError("inner_entropy: no positive activation");
    double h = 0.0;
    for (double v : z) {
        if (v > 0.0) {
            const double p = v / total;
            h -= p * std::log(p);
        }
    }
    return std::max(h, 0.0);
}

std::vector<NodeReport> node_reports(const Multiplex& m, const MultiplexState& s,
                                     const Scenario& scenario, double alpha) {
    const Matrix values = metric_readout(m, s, scenario.metrics);
    const auto influence = outer_influence(m);
    std::vector<NodeReport> reports;
    for (std::size_t i = 0; i < m.outer_size(); ++i) {
        NodeReport r;
        r.node = i;
        r.metric_values.assign(values.row(i).begin(), values.row(i).end());
        r.contribution = contribution(values.row(i), scenario.targets.row(i), influence[i], alpha);
        r.entropy = inner_entropy(s.inners[i]);
        reports.push_back(std::move(r));
    }
    return reports;
}

std::vector<std::size_t> rank_nodes(std::span<const NodeReport> reports) {
    if (reports.empty()) throw ArgumentError("rank_nodes of an empty report list");
    std::vector<std::size_t> order(reports.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (reports[a].contribution != reports[b].contribution) {
            return reports[a].contribution > reports[b].contribution;
        }
        return reports[a].node < reports[b].node;
    });
    std::vector<std::size_t> nodes;
    for (std::size_t k : order) nodes.push_back(reports[k].node);
    return nodes;
}

std::vector<std::size_t> rank_by_contribution(std::span<const double> contributions) {
    std::vector<NodeReport> reports;
    for (std::size_t i = 0; i < contributions.size(); ++i) {
        reports.push_back({i, {}, contributions[i], 0.0});
    }
    return rank_nodes(reports);
}

}  // namespace fhm
