#include "fhm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fhm/io.hpp"

namespace fhm {

std::size_t Topology::total_concepts() const noexcept {
    std::size_t n = 0;
    for (auto c : inner_n) n += c;
    return n;
}

std::vector<std::string> default_metric_names() {
    return {"wait", "throughput", "utilization", "patience"};
}

void validate(const Scenario& s) {
    const std::size_t n = s.topology.outer_n;
    if (n == 0) throw ValidationError("topology.outer_n", "must be at least 1");
    if (s.topology.inner_n.size() != n) {
        throw ValidationError("topology.inner_n", "expected one concept count per outer node");
    }
    for (auto c : s.topology.inner_n) {
        if (c == 0) throw ValidationError("topology.inner_n", "every node needs at least 1 concept");
    }
    if (s.inputs.size() != s.topology.total_concepts()) {
        throw ValidationError("inputs", "expected one interval per concept");
    }

    const auto& st = s.initial_state;
    if (st.outer.size() != n || st.inners.size() != n || st.interlayer_input.size() != n) {
        throw ValidationError("initial_state", "shape does not match topology");
    }
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    for (double y : st.outer)
        if (!unit(y)) throw ValidationError("initial_state.outer", "activation outside [0,1]");
    for (std::size_t i = 0; i < n; ++i) {
        if (st.inners[i].size() != s.topology.inner_n[i] ||
            st.interlayer_input[i].size() != s.topology.inner_n[i]) {
            throw ValidationError("initial_state.inners", "length does not match topology");
        }
        for (double z : st.inners[i])
            if (!unit(z)) throw ValidationError("initial_state.inners", "activation outside [0,1]");
    }

    const std::size_t k = s.metrics.count();
    if (k == 0) throw ValidationError("metric_names", "at least one metric is required");
    if (s.targets.rows() != n || s.targets.cols() != k) {
        throw ValidationError("targets", "expected outer_n x metric_count entries");
    }
    for (double t : s.targets.data())
        if (!unit(t)) throw ValidationError("targets", "entry outside [0,1]");

    if (s.metrics.readout_map.size() != n) {
        throw ValidationError("readout_map", "expected one row per outer node");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (s.metrics.readout_map[i].size() != k) {
            throw ValidationError("readout_map", "row does not cover every metric");
        }
        for (auto c : s.metrics.readout_map[i])
            if (c >= s.topology.inner_n[i]) {
                throw ValidationError("readout_map", "concept index out of range");
            }
    }

    if (s.multiplex) {
        if (s.multiplex->outer_size() != n) {
            throw ValidationError("multiplex", "outer node count does not match topology");
        }
        for (std::size_t i = 0; i < n; ++i)
            if (s.multiplex->inner_size(i) != s.topology.inner_n[i]) {
                throw ValidationError("multiplex", "inner concept count does not match topology");
            }
    }
}

void check_compatible(const Multiplex& m, const Scenario& s) {
    if (m.outer_size() != s.topology.outer_n) {
        throw ArgumentError("multiplex and scenario disagree on outer node count");
    }
    for (std::size_t i = 0; i < m.outer_size(); ++i) {
        if (m.inner_size(i) != s.topology.inner_n.at(i)) {
            throw ArgumentError("multiplex and scenario disagree on concepts of node " +
                                std::to_string(i));
        }
    }
    try {
        validate(s);
    } catch (const ValidationError& e) {
        throw ArgumentError(std::string("invalid scenario: ") + e.what());
    }
}

double raw_wait(double arrival, double capacity) {
    if (!(arrival > 0.0 && arrival < capacity)) {
        throw ArgumentError("raw_wait requires 0 < arrival < capacity");
    }
    return arrival / (capacity * (capacity - arrival));
}

Scenario generate_scenario(std::uint64_t seed, std::size_t outer_n, std::size_t inner_n,
                           std::size_t metric_count) {
    if (outer_n < 1 || inner_n < 1 || metric_count < 1) {
        throw ArgumentError("outer_n, inner_n and metric_count must be at least 1");
    }
    if (inner_n < metric_count) {
        throw ArgumentError("inner_n (" + std::to_string(inner_n) +
                            ") must be >= metric_count (" + std::to_string(metric_count) + ")");
    }
    const auto names = default_metric_names();
    if (metric_count > names.size()) {
        throw ArgumentError("metric_count must be at most 4 (wait, throughput, utilization, patience)");
    }

    std::mt19937_64 rng(seed);
    auto u = [&] { return unit_draw(rng()); };

    std::vector<double> arrival(outer_n), capacity(outer_n), patience(outer_n), wait(outer_n);
    for (std::size_t i = 0; i < outer_n; ++i) {
        capacity[i] = 0.5 + u();
        arrival[i] = capacity[i] * (0.2 + 0.7 * u());
        patience[i] = 0.5 + 0.4 * u();
        wait[i] = raw_wait(arrival[i], capacity[i]);
    }
    const double max_wait = *std::max_element(wait.begin(), wait.end());
    const double max_arrival = *std::max_element(arrival.begin(), arrival.end());

    Scenario s;
    s.name = "synthetic-" + std::to_string(seed);
    s.seed = seed;
    s.topology.outer_n = outer_n;
    s.topology.inner_n.assign(outer_n, inner_n);
    s.metrics.names.assign(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(metric_count));
    s.targets = Matrix(outer_n, metric_count);
    for (std::size_t i = 0; i < outer_n; ++i) {
        const double values[4] = {wait[i] / max_wait, arrival[i] / max_arrival,
                                  arrival[i] / capacity[i], patience[i]};
        for (std::size_t k = 0; k < metric_count; ++k) s.targets(i, k) = values[k];
        std::vector<std::size_t> row(metric_count);
        for (std::size_t k = 0; k < metric_count; ++k) row[k] = (i + k) % inner_n;
        s.metrics.readout_map.push_back(std::move(row));
    }

    auto noisy = [&](double v) { return std::clamp(v + 0.2 * u() - 0.1, 0.0, 1.0); };
    for (std::size_t i = 0; i < outer_n; ++i) {
        // Concept c reports metric k when c == (i + k) mod inner_n.
        std::vector<int> metric_of(inner_n, -1);
        for (std::size_t k = 0; k < metric_count; ++k) {
            metric_of[s.metrics.readout_map[i][k]] = static_cast<int>(k);
        }
        std::vector<double> z(inner_n);
        for (std::size_t c = 0; c < inner_n; ++c) {
            z[c] = noisy(metric_of[c] >= 0 ? s.targets(i, static_cast<std::size_t>(metric_of[c])) : 0.5);
        }
        for (std::size_t c = 0; c < inner_n; ++c) {
            const double v = metric_of[c] >= 0 ? s.targets(i, static_cast<std::size_t>(metric_of[c])) : u();
            s.inputs.push_back(FuzzyInterval::crisp(v));
        }
        double mean = 0.0;
        for (std::size_t k = 0; k < metric_count; ++k) mean += s.targets(i, k);
        mean /= static_cast<double>(metric_count);
        s.initial_state.outer.push_back(noisy(mean));
        s.initial_state.inners.push_back(std::move(z));
        s.initial_state.interlayer_input.emplace_back(inner_n, 0.0);
    }
    validate(s);
    return s;
}

Scenario fuzzify(const Scenario& s, double width) {
    if (!(width >= 0.0 && width <= 0.5)) throw ArgumentError("fuzzify width must lie in [0, 0.5]");
    Scenario out = s;
    for (auto& iv : out.inputs) {
        const double v = iv.midpoint();
        iv = FuzzyInterval(std::max(0.0, std::min(iv.lo(), v - width)),
                           std::min(1.0, std::max(iv.hi(), v + width)));
    }
    return out;
}

Scenario load_scenario(const std::filesystem::path& path) {
    return io::scenario_from_json(io::parse(io::read_file(path), path.string()));
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
    validate(s);
    io::write_file(path, io::dump(io::to_json(s)));
}

}  // namespace fhm
