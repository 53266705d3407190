#include "fhm/io.hpp"

#include <fstream>
#include <sstream>

namespace fhm::io {
namespace {

std::string at(const std::string& path, const std::string& key) { return path + "." + key; }
std::string at(const std::string& path, std::size_t idx) {
    return path + "[" + std::to_string(idx) + "]";
}

const json& field(const json& j, const std::string& path, const std::string& key) {
    if (!j.is_object()) throw ParseError(path + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(at(path, key) + ": missing field");
    return *it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path + ": expected a number");
    return j.get<double>();
}

std::size_t index(const json& j, const std::string& path) {
    if (!j.is_number_unsigned()) throw ParseError(path + ": expected a non-negative integer");
    return j.get<std::size_t>();
}

const json& array(const json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path + ": expected an array");
    return j;
}

std::vector<double> numbers(const json& j, const std::string& path) {
    std::vector<double> out;
    for (std::size_t k = 0; k < array(j, path).size(); ++k) out.push_back(number(j[k], at(path, k)));
    return out;
}

std::vector<double> numbers(const json& j, const std::string& path, std::size_t expected) {
    auto out = numbers(j, path);
    if (out.size() != expected) {
        throw ParseError(path + ": expected " + std::to_string(expected) + " entries, got " +
                         std::to_string(out.size()));
    }
    return out;
}

Matrix matrix(const json& j, const std::string& path, std::size_t rows, std::size_t cols) {
    array(j, path);
    if (j.size() != rows) {
        throw ParseError(path + ": expected " + std::to_string(rows) + " rows, got " +
                         std::to_string(j.size()));
    }
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = numbers(j[r], at(path, r), cols);
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
    }
    return m;
}

json vec(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

}  // namespace

json to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(vec(m.row(r)));
    return rows;
}

json to_json(const Multiplex& m) {
    json j;
    j["squash"] = {{"kind", "logistic"}, {"steepness", m.squash().steepness}};
    j["outer_weights"] = to_json(m.outer_weights());
    j["outer_bias"] = vec(m.outer_bias());
    json inner = json::array();
    for (const auto& f : m.inner()) {
        inner.push_back({{"weights", to_json(f.weights())}, {"external_input", vec(f.external_input())}});
    }
    j["inner"] = std::move(inner);
    json coupling = json::array();
    for (const auto& d : m.down_coupling()) coupling.push_back(vec(d));
    j["down_coupling"] = std::move(coupling);
    json agg = json::array();
    for (auto a : m.up_aggregation()) agg.push_back(to_string(a));
    j["up_aggregation"] = std::move(agg);
    json edges = json::array();
    for (const auto& e : m.interlayer()) {
        edges.push_back({{"src_node", e.src_node},
                         {"src_concept", e.src_concept},
                         {"dst_node", e.dst_node},
                         {"dst_concept", e.dst_concept},
                         {"weight", e.weight}});
    }
    j["interlayer"] = std::move(edges);
    return j;
}

json to_json(const MultiplexState& s) {
    json inners = json::array();
    for (const auto& z : s.inners) inners.push_back(vec(z));
    return {{"outer", vec(s.outer)}, {"inners", std::move(inners)}};
}

json to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["topology"] = {{"outer_n", s.topology.outer_n}, {"inner_n", s.topology.inner_n}};
    json inputs = json::array();
    for (const auto& iv : s.inputs) inputs.push_back({iv.lo(), iv.hi()});
    j["inputs"] = std::move(inputs);
    j["initial_state"] = to_json(s.initial_state);
    j["targets"] = to_json(s.targets);
    j["metric_names"] = s.metrics.names;
    j["readout_map"] = s.metrics.readout_map;
    if (s.multiplex) j["multiplex"] = to_json(*s.multiplex);
    return j;
}

Multiplex multiplex_from_json(const json& j, const std::string& path) {
    SquashingFunction squash;
    if (j.is_object() && j.contains("squash")) {
        const auto& sq = j["squash"];
        const std::string sp = at(path, "squash");
        const auto& kind = field(sq, sp, "kind");
        if (!kind.is_string() || kind.get<std::string>() != "logistic") {
            throw ParseError(at(sp, "kind") + ": only \"logistic\" is supported");
        }
        try {
            squash = SquashingFunction(number(field(sq, sp, "steepness"), at(sp, "steepness")));
        } catch (const ArgumentError& e) {
            throw ValidationError(at(sp, "steepness"), e.what());
        }
    }
    const auto& inner_j = array(field(j, path, "inner"), at(path, "inner"));
    const std::size_t n = inner_j.size();
    const Matrix outer = matrix(field(j, path, "outer_weights"), at(path, "outer_weights"), n, n);
    const auto bias = numbers(field(j, path, "outer_bias"), at(path, "outer_bias"), n);

    std::vector<Matrix> weights;
    std::vector<std::vector<double>> inputs;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string ip = at(at(path, "inner"), i);
        const auto& wj = array(field(inner_j[i], ip, "weights"), at(ip, "weights"));
        const auto& xj = field(inner_j[i], ip, "external_input");
        const std::size_t ni = array(xj, at(ip, "external_input")).size();
        if (ni == 0) throw ParseError(at(ip, "external_input") + ": empty");
        weights.push_back(matrix(wj, at(ip, "weights"), ni, ni));
        inputs.push_back(numbers(xj, at(ip, "external_input"), ni));
    }
    const auto& dj = array(field(j, path, "down_coupling"), at(path, "down_coupling"));
    if (dj.size() != n) throw ParseError(at(path, "down_coupling") + ": expected one row per node");
    std::vector<std::vector<double>> coupling;
    for (std::size_t i = 0; i < n; ++i) {
        coupling.push_back(numbers(dj[i], at(at(path, "down_coupling"), i), inputs[i].size()));
    }
    std::vector<Aggregation> agg(n, Aggregation::mean);
    if (j.contains("up_aggregation")) {
        const std::string ap = at(path, "up_aggregation");
        const auto& aj = array(j["up_aggregation"], ap);
        if (aj.size() != n) throw ParseError(ap + ": expected one entry per node");
        for (std::size_t i = 0; i < n; ++i) {
            if (!aj[i].is_string()) throw ParseError(at(ap, i) + ": expected a string");
            try {
                agg[i] = aggregation_from_string(aj[i].get<std::string>());
            } catch (const ArgumentError& e) {
                throw ParseError(at(ap, i) + ": " + e.what());
            }
        }
    }
    std::vector<InterlayerEdge> edges;
    if (j.contains("interlayer")) {
        const std::string ep = at(path, "interlayer");
        const auto& ej = array(j["interlayer"], ep);
        for (std::size_t e = 0; e < ej.size(); ++e) {
            const std::string p = at(ep, e);
            edges.push_back({index(field(ej[e], p, "src_node"), at(p, "src_node")),
                             index(field(ej[e], p, "src_concept"), at(p, "src_concept")),
                             index(field(ej[e], p, "dst_node"), at(p, "dst_node")),
                             index(field(ej[e], p, "dst_concept"), at(p, "dst_concept")),
                             number(field(ej[e], p, "weight"), at(p, "weight"))});
        }
    }
    try {
        std::vector<Fcm> inner;
        for (std::size_t i = 0; i < n; ++i) inner.emplace_back(weights[i], inputs[i], squash);
        return Multiplex(outer, bias, std::move(inner), std::move(coupling), std::move(agg),
                         std::move(edges), squash);
    } catch (const ArgumentError& e) {
        throw ValidationError(path, e.what());
    }
}

MultiplexState state_from_json(const json& j, const std::string& path) {
    MultiplexState s;
    s.outer = numbers(field(j, path, "outer"), at(path, "outer"));
    const std::string ip = at(path, "inners");
    const auto& inners = array(field(j, path, "inners"), ip);
    for (std::size_t i = 0; i < inners.size(); ++i) {
        s.inners.push_back(numbers(inners[i], at(ip, i)));
        s.interlayer_input.emplace_back(s.inners.back().size(), 0.0);
    }
    return s;
}

Scenario scenario_from_json(const json& j) {
    const std::string root = "scenario";
    Scenario s;
    const auto& name = field(j, root, "name");
    if (!name.is_string()) throw ParseError("name: expected a string");
    s.name = name.get<std::string>();
    const auto& seed = field(j, root, "seed");
    if (!seed.is_number_unsigned()) throw ParseError("seed: expected a non-negative integer");
    s.seed = seed.get<std::uint64_t>();

    const auto& topo = field(j, root, "topology");
    s.topology.outer_n = index(field(topo, "topology", "outer_n"), "topology.outer_n");
    const auto& inner_n = array(field(topo, "topology", "inner_n"), "topology.inner_n");
    for (std::size_t i = 0; i < inner_n.size(); ++i) {
        s.topology.inner_n.push_back(index(inner_n[i], at("topology.inner_n", i)));
    }

    const auto& inputs = array(field(j, root, "inputs"), "inputs");
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const auto pair = numbers(inputs[k], at("inputs", k), 2);
        try {
            s.inputs.emplace_back(pair[0], pair[1]);
        } catch (const DomainError& e) {
            throw ValidationError(at("inputs", k), e.what());
        }
    }

    s.initial_state = state_from_json(field(j, root, "initial_state"), "initial_state");

    const auto& names = array(field(j, root, "metric_names"), "metric_names");
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (!names[k].is_string()) throw ParseError(at("metric_names", k) + ": expected a string");
        s.metrics.names.push_back(names[k].get<std::string>());
    }
    s.targets = matrix(field(j, root, "targets"), "targets", s.topology.outer_n, names.size());

    const auto& map = array(field(j, root, "readout_map"), "readout_map");
    for (std::size_t i = 0; i < map.size(); ++i) {
        const std::string rp = at("readout_map", i);
        std::vector<std::size_t> row;
        for (std::size_t k = 0; k < array(map[i], rp).size(); ++k) {
            row.push_back(index(map[i][k], at(rp, k)));
        }
        s.metrics.readout_map.push_back(std::move(row));
    }

    if (j.contains("multiplex")) s.multiplex = multiplex_from_json(j["multiplex"], "multiplex");
    validate(s);
    return s;
}

json parse(std::string_view text, const std::string& source) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                         ": malformed JSON (" + e.what() + ")");
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ArgumentError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ArgumentError("write failed for " + path.string());
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace fhm::io
