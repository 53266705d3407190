#pragma once

// Scenario: the data side of a fit. Topology, initial activations, per-concept
// (possibly fuzzy) inputs, per-node metric targets, and the readout map that
// says which inner concept reports which metric.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fhm/core.hpp"
#include "fhm/multiplex.hpp"

namespace fhm {

struct Topology {
    std::size_t outer_n = 0;
    std::vector<std::size_t> inner_n;

    std::size_t total_concepts() const noexcept;
    friend bool operator==(const Topology&, const Topology&) = default;
};

/// Metric names plus, per outer node and metric, the reporting concept index.
struct MetricSet {
    std::vector<std::string> names;
    std::vector<std::vector<std::size_t>> readout_map;

    std::size_t count() const noexcept { return names.size(); }
    friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

/// Wait, throughput, utilization, patience. The last column reads "utility"
/// in some write-ups; it is the same quantity.
std::vector<std::string> default_metric_names();

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    Topology topology;
    /// One interval per concept, nodes in order, concepts in order within a node.
    std::vector<FuzzyInterval> inputs;
    MultiplexState initial_state;
    /// outer_n x metric count, entries in [0,1].
    Matrix targets;
    MetricSet metrics;
    /// Optional hand-authored starting model.
    std::optional<Multiplex> multiplex;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws ValidationError naming the first inconsistent field.
void validate(const Scenario& s);

/// Throws ArgumentError if the scenario does not describe m's topology.
void check_compatible(const Multiplex& m, const Scenario& s);

/// Synthetic service-metric scenario. Per node: arrival intensity a < service
/// capacity c, utilization a/c, wait a/(c(c-a)) and throughput a (both scaled
/// by the cohort maximum), patience uniform in [0.5, 0.9].
Scenario generate_scenario(std::uint64_t seed, std::size_t outer_n, std::size_t inner_n,
                           std::size_t metric_count);

/// Raw waiting-time shape a/(c(c-a)) used by the generator; requires 0 < a < c.
double raw_wait(double arrival, double capacity);

/// Every crisp input v becomes [max(0, v-width), min(1, v+width)]. Already
/// fuzzy inputs are widened around their midpoint. Targets are untouched.
Scenario fuzzify(const Scenario& s, double width);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

}  // namespace fhm
