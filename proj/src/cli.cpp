#include "fhm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <thread>

#include "fhm/compare.hpp"
#include "fhm/fit.hpp"
#include "fhm/io.hpp"
#include "fhm/metrics.hpp"
#include "fhm/scenario.hpp"

namespace fhm::cli {
namespace {

namespace fs = std::filesystem;
using io::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt2(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
    fs::path p = out;
    p.replace_extension();
    p += suffix;
    return p;
}

class Manifest {
public:
    Manifest(std::string command, json config, std::uint64_t seed)
        : command_(std::move(command)), config_(std::move(config)), seed_(seed),
          start_(std::chrono::steady_clock::now()) {}

    void add_input(const fs::path& path, const std::string& bytes) {
        inputs_[path.string()] = digest(bytes);
    }

    void write_for(const fs::path& artifact) const {
        json j;
        j["command"] = command_;
        j["artifact"] = artifact.filename().string();
        j["config"] = config_;
        j["inputs"] = inputs_;
        j["tool_version"] = kToolVersion;
        j["seed"] = seed_;
        j["duration_ms"] = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - start_)
                               .count();
        fs::path p = artifact;
        p += ".manifest.json";
        io::write_file(p, io::dump(j));
    }

private:
    std::string command_;
    json config_;
    std::uint64_t seed_;
    json inputs_ = json::object();
    std::chrono::steady_clock::time_point start_;
};

struct FitFlags {
    double beta = 0.1;
    double step_size = 1.0;
    std::size_t max_iters = 500;
    std::size_t settle_steps = 8;
    std::uint64_t seed = 42;
    double grad_tol = 1e-8;

    void attach(CLI::App& cmd) {
        cmd.add_option("--beta", beta, "weight of the alignment residual")->capture_default_str();
        cmd.add_option("--step-size", step_size, "initial line-search step")->capture_default_str();
        cmd.add_option("--max-iters", max_iters, "iteration budget")->capture_default_str();
        cmd.add_option("--settle-steps", settle_steps, "dynamics steps before readout")
            ->capture_default_str();
        cmd.add_option("--seed", seed, "initialization seed")->capture_default_str();
        cmd.add_option("--grad-tol", grad_tol, "projected-gradient stopping threshold")
            ->capture_default_str();
    }

    FitConfig config() const {
        FitConfig cfg;
        cfg.beta = beta;
        cfg.step_size = step_size;
        cfg.max_iters = max_iters;
        cfg.settle_steps = settle_steps;
        cfg.seed = seed;
        cfg.grad_tol = grad_tol;
        cfg.validate();
        return cfg;
    }

    json echo() const {
        return {{"beta", beta},         {"step_size", step_size}, {"max_iters", max_iters},
                {"settle_steps", settle_steps}, {"seed", seed},  {"grad_tol", grad_tol}};
    }
};

Scenario read_scenario(const fs::path& path, Manifest& manifest) {
    const std::string bytes = io::read_file(path);
    manifest.add_input(path, bytes);
    return io::scenario_from_json(io::parse(bytes, path.string()));
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenCmd {
    std::uint64_t seed = 42;
    std::size_t outer_n = 5;
    std::size_t inner_n = 4;
    std::size_t metrics = 4;
    std::string out;

    void attach(CLI::App& cmd) {
        cmd.add_option("--seed", seed)->capture_default_str();
        cmd.add_option("--outer-n", outer_n)->capture_default_str();
        cmd.add_option("--inner-n", inner_n)->capture_default_str();
        cmd.add_option("--metrics", metrics)->capture_default_str();
        cmd.add_option("--out", out, "scenario file to write")->required();
    }

    int run(std::ostream& o) const {
        if (inner_n < metrics) {
            throw ArgumentError("--inner-n (" + std::to_string(inner_n) +
                                ") must be >= --metrics (" + std::to_string(metrics) +
                                "): every metric needs its own reporting concept");
        }
        Manifest manifest("gen",
                          {{"seed", seed}, {"outer_n", outer_n}, {"inner_n", inner_n}, {"metrics", metrics}},
                          seed);
        const Scenario s = generate_scenario(seed, outer_n, inner_n, metrics);
        save_scenario(s, out);
        manifest.write_for(out);
        o << "wrote " << out << "\n";
        return kExitOk;
    }
};

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

json node_json(const NodeReport& r, const Scenario& sc) {
    json metrics = json::object();
    json targets = json::object();
    for (std::size_t k = 0; k < sc.metrics.count(); ++k) {
        metrics[sc.metrics.names[k]] = r.metric_values[k];
        targets[sc.metrics.names[k]] = sc.targets(r.node, k);
    }
    return {{"node", r.node},
            {"metrics", std::move(metrics)},
            {"targets", std::move(targets)},
            {"contribution", r.contribution},
            {"entropy", r.entropy}};
}

struct FitCmd {
    std::string scenario;
    std::string out;
    std::string trace;
    double alpha = 0.5;
    FitFlags flags;

    void attach(CLI::App& cmd) {
        cmd.add_option("--scenario", scenario, "scenario file")->required();
        cmd.add_option("--out", out, "fit report (JSON)")->required();
        cmd.add_option("--trace", trace, "loss-trace CSV (default: <out>.trace.csv)");
        cmd.add_option("--alpha", alpha, "contribution blend of alignment vs influence")
            ->capture_default_str();
        flags.attach(cmd);
    }

    int run(std::ostream& o) const {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("--alpha must lie in [0,1]");
        json config = flags.echo();
        config["alpha"] = alpha;
        Manifest manifest("fit", config, flags.seed);
        const Scenario sc = read_scenario(scenario, manifest);
        const FitConfig cfg = flags.config();
        const FitResult r = fit_scenario(sc, cfg);

        const auto reports = node_reports(r.fitted, r.final_state, sc, alpha);
        json nodes = json::array();
        for (const auto& nr : reports) nodes.push_back(node_json(nr, sc));

        json report;
        report["scenario"] = sc.name;
        report["config"] = config;
        report["status"] = to_string(r.status);
        report["iters"] = r.iters;
        report["loss"] = {{"total", r.final_loss.total},
                          {"fit_term", r.final_loss.fit_term},
                          {"align_term", r.final_loss.align_term}};
        report["metric_names"] = sc.metrics.names;
        report["nodes"] = std::move(nodes);
        report["ranking"] = rank_nodes(reports);
        report["fitted"] = io::to_json(r.fitted);
        report["final_state"] = io::to_json(r.final_state);
        io::write_file(out, io::dump(report));
        manifest.write_for(out);

        const fs::path trace_path = trace.empty() ? sibling(out, ".trace.csv") : fs::path(trace);
        std::string csv = "iteration,loss\n";
        for (std::size_t k = 0; k < r.loss_trace.size(); ++k) {
            csv += std::to_string(k) + "," + fmt17(r.loss_trace[k]) + "\n";
        }
        io::write_file(trace_path, csv);
        manifest.write_for(trace_path);

        o << "status " << to_string(r.status) << " after " << r.iters
          << " iterations, fit_term " << fmt17(r.final_loss.fit_term) << "\n";
        return kExitOk;
    }
};

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareCmd {
    std::string scenario;
    std::uint64_t suite_from = 1;
    std::uint64_t suite_to = 20;
    std::size_t outer_n = 5;
    std::size_t inner_n = 4;
    std::size_t metrics = 4;
    std::size_t budget = 200;
    std::size_t settle_steps = 8;
    std::uint64_t seed = 42;
    std::size_t jobs = 1;
    std::string out;
    CLI::Option* scenario_opt = nullptr;

    void attach(CLI::App& cmd) {
        scenario_opt = cmd.add_option("--scenario", scenario, "single scenario file");
        cmd.add_option("--suite-from", suite_from, "first generator seed of the suite")
            ->capture_default_str();
        cmd.add_option("--suite-to", suite_to, "last generator seed (inclusive)")->capture_default_str();
        cmd.add_option("--outer-n", outer_n)->capture_default_str();
        cmd.add_option("--inner-n", inner_n)->capture_default_str();
        cmd.add_option("--metrics", metrics)->capture_default_str();
        cmd.add_option("--budget", budget, "iteration budget for both fits")->capture_default_str();
        cmd.add_option("--settle-steps", settle_steps)->capture_default_str();
        cmd.add_option("--seed", seed, "initialization seed")->capture_default_str();
        cmd.add_option("--jobs", jobs, "worker threads over suite members")->capture_default_str();
        cmd.add_option("--out", out, "comparison CSV")->required();
    }

    int run(std::ostream& o) const {
        json config = {{"budget", budget}, {"settle_steps", settle_steps}, {"seed", seed}};
        std::vector<Scenario> suite;
        Manifest manifest("compare", config, seed);
        if (scenario_opt->count() > 0) {
            suite.push_back(read_scenario(scenario, manifest));
        } else {
            if (suite_to < suite_from) throw ArgumentError("--suite-to must be >= --suite-from");
            for (std::uint64_t s = suite_from; s <= suite_to; ++s) {
                suite.push_back(generate_scenario(s, outer_n, inner_n, metrics));
            }
        }
        FitConfig cfg;
        cfg.max_iters = budget;
        cfg.settle_steps = settle_steps;
        cfg.seed = seed;
        cfg.validate();

        std::vector<std::pair<double, double>> results(suite.size());
        std::vector<std::exception_ptr> errors(suite.size());
        auto work = [&](std::size_t b) {
            try {
                const auto c = compare_fhm_fcm(suite[b], cfg);
                results[b] = {c.fhm_final_loss, c.fcm_final_loss};
            } catch (...) {
                errors[b] = std::current_exception();
            }
        };
        const std::size_t workers = std::clamp<std::size_t>(jobs, 1, suite.size());
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t b = w; b < suite.size(); b += workers) work(b);
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);

        std::string csv = "scenario,fhm_loss,fcm_loss,winner,win_rate\n";
        std::size_t wins = 0;
        for (std::size_t b = 0; b < suite.size(); ++b) {
            const auto [fhm, fcm] = results[b];
            std::string winner = "tie";
            if (std::abs(fhm - fcm) > 1e-9) winner = fhm < fcm ? "fhm" : "fcm";
            if (winner == "fhm") ++wins;
            csv += suite[b].name + "," + fmt17(fhm) + "," + fmt17(fcm) + "," + winner + ",\n";
        }
        const double rate = static_cast<double>(wins) / static_cast<double>(suite.size());
        csv += "summary,,,," + fmt17(rate) + "\n";
        io::write_file(out, csv);
        manifest.write_for(out);
        o << "fhm won " << wins << " of " << suite.size() << "\n";
        return kExitOk;
    }
};

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportCmd {
    std::string input;
    std::string format = "markdown";
    std::string out;

    void attach(CLI::App& cmd) {
        cmd.add_option("--input", input, "fit report (JSON)")->required();
        cmd.add_option("--format", format)
            ->check(CLI::IsMember({"csv", "markdown"}))
            ->capture_default_str();
        cmd.add_option("--out", out, "output file (default: stdout)");
    }

    int run(std::ostream& o) const {
        const std::string bytes = io::read_file(input);
        if (bytes.find_first_not_of(" \t\r\n") == std::string::npos) {
            throw ParseError(input + ": empty report");
        }
        const json j = io::parse(bytes, input);
        if (!j.is_object() || !j.contains("metric_names") || !j.contains("nodes") ||
            !j["nodes"].is_array() || j["nodes"].empty()) {
            throw ParseError(input + ": expected a fit report with metric_names and nodes");
        }
        std::vector<std::string> names;
        for (const auto& n : j["metric_names"]) names.push_back(n.get<std::string>());

        std::vector<NodeReport> reports;
        for (const auto& n : j["nodes"]) {
            NodeReport r;
            r.node = n.at("node").get<std::size_t>();
            for (const auto& name : names) r.metric_values.push_back(n.at("metrics").at(name).get<double>());
            r.contribution = n.at("contribution").get<double>();
            reports.push_back(std::move(r));
        }
        const auto order = rank_nodes(reports);

        std::vector<std::string> header{"Node"};
        for (const auto& n : names) header.push_back(capitalize(n));
        header.push_back("Contribution");

        std::vector<std::vector<std::string>> rows;
        for (std::size_t node : order) {
            const auto it = std::find_if(reports.begin(), reports.end(),
                                         [&](const NodeReport& r) { return r.node == node; });
            std::vector<std::string> row{std::to_string(node)};
            for (double v : it->metric_values) row.push_back(fmt2(v));
            row.push_back(fmt2(it->contribution));
            rows.push_back(std::move(row));
        }

        std::ostringstream text;
        auto join = [&](const std::vector<std::string>& cells, const char* sep) {
            for (std::size_t c = 0; c < cells.size(); ++c) text << (c ? sep : "") << cells[c];
        };
        if (format == "csv") {
            join(header, ",");
            text << "\n";
            for (const auto& r : rows) {
                join(r, ",");
                text << "\n";
            }
        } else {
            text << "| ";
            join(header, " | ");
            text << " |\n|";
            for (std::size_t c = 0; c < header.size(); ++c) text << "---|";
            text << "\n";
            for (const auto& r : rows) {
                text << "| ";
                join(r, " | ");
                text << " |\n";
            }
        }
        if (out.empty()) {
            o << text.str();
        } else {
            Manifest manifest("report", {{"format", format}}, 0);
            manifest.add_input(input, bytes);
            io::write_file(out, text.str());
            manifest.write_for(out);
        }
        return kExitOk;
    }
};

// ---------------------------------------------------------------------------
// intervals
// ---------------------------------------------------------------------------

struct IntervalsCmd {
    std::string scenario;
    double width = 0.1;
    std::size_t budget = 64;
    std::string out;
    std::string samples_csv;
    FitFlags flags;

    void attach(CLI::App& cmd) {
        cmd.add_option("--scenario", scenario, "scenario file")->required();
        cmd.add_option("--width", width, "fuzzification half-width in [0, 0.5]")->capture_default_str();
        cmd.add_option("--budget", budget, "model evaluations per propagation")->capture_default_str();
        cmd.add_option("--out", out, "IVFS report (JSON)")->required();
        cmd.add_option("--samples", samples_csv, "per-sample plot data (CSV)");
        flags.attach(cmd);
    }

    int run(std::ostream& o) const {
        json config = flags.echo();
        config["width"] = width;
        config["budget"] = budget;
        Manifest manifest("intervals", config, flags.seed);
        const Scenario sc = read_scenario(scenario, manifest);
        const FitConfig cfg = flags.config();
        const Scenario fuzzy = fuzzify(sc, width);
        const FitResult r = fit_scenario(sc, cfg);
        const auto prop = propagate_intervals(r.fitted, sc, fuzzy.inputs, cfg, budget);

        json nodes = json::array();
        for (std::size_t i = 0; i < prop.intervals.size(); ++i) {
            json ivs = json::object();
            for (std::size_t k = 0; k < sc.metrics.count(); ++k) {
                ivs[sc.metrics.names[k]] = {prop.intervals[i][k].lo(), prop.intervals[i][k].hi()};
            }
            nodes.push_back({{"node", i}, {"intervals", std::move(ivs)}});
        }
        json report;
        report["scenario"] = sc.name;
        report["config"] = config;
        report["evaluations"] = prop.samples.size();
        report["metric_names"] = sc.metrics.names;
        report["nodes"] = std::move(nodes);
        io::write_file(out, io::dump(report));
        manifest.write_for(out);

        if (!samples_csv.empty()) {
            std::string csv = "sample";
            for (std::size_t i = 0; i < sc.topology.outer_n; ++i)
                for (const auto& name : sc.metrics.names) csv += "," + name + "@" + std::to_string(i);
            csv += "\n";
            for (std::size_t s = 0; s < prop.outputs.size(); ++s) {
                csv += std::to_string(s);
                for (double v : prop.outputs[s].data()) csv += "," + fmt17(v);
                csv += "\n";
            }
            io::write_file(samples_csv, csv);
            manifest.write_for(samples_csv);
        }
        o << "propagated " << prop.samples.size() << " samples\n";
        return kExitOk;
    }
};

}  // namespace

std::string digest(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fuzzy hierarchical multiplex toolkit", "fhm"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    GenCmd gen;
    FitCmd fitc;
    CompareCmd cmp;
    ReportCmd rep;
    IntervalsCmd ivs;
    auto* gen_app = app.add_subcommand("gen", "generate a synthetic scenario");
    auto* fit_app = app.add_subcommand("fit", "fit a multiplex to a scenario");
    auto* cmp_app = app.add_subcommand("compare", "FHM vs flat FCM on a scenario or seeded suite");
    auto* rep_app = app.add_subcommand("report", "render a fit report as a node table");
    auto* ivs_app = app.add_subcommand("intervals", "propagate fuzzy inputs to metric intervals");
    gen.attach(*gen_app);
    fitc.attach(*fit_app);
    cmp.attach(*cmp_app);
    rep.attach(*rep_app);
    ivs.attach(*ivs_app);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen_app) return gen.run(out);
        if (*fit_app) return fitc.run(out);
        if (*cmp_app) return cmp.run(out);
        if (*rep_app) return rep.run(out);
        if (*ivs_app) return ivs.run(out);
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace fhm::cli
