#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fhm/compare.hpp"
#include "fhm/metrics.hpp"
#include "fhm/scenario.hpp"
#include "support/oracles.hpp"

using namespace fhm;
using fhm::testing::InstanceShape;
using fhm::testing::Rng;

namespace {

constexpr double kEntropy226 = 0.950270539233234560;
constexpr double kLn4 = 1.38629436111989062;

Multiplex one_node(std::size_t concepts) {
    return Multiplex(Matrix(1, 1), {0.0}, {Fcm(Matrix(concepts, concepts), std::vector<double>(concepts, 0.0))},
                     {std::vector<double>(concepts, 0.0)}, {Aggregation::mean}, {});
}

MetricSet table_metrics() {
    MetricSet ms;
    ms.names = default_metric_names();
    ms.readout_map = {{0, 1, 2, 3}};
    return ms;
}

}  // namespace

TEST_CASE("metric readout") {
    const auto m = one_node(4);
    const auto ms = table_metrics();

    SUBCASE("all-0.5 state") {
        const auto s = make_state(m, {0.5}, {{0.5, 0.5, 0.5, 0.5}});
        const auto v = metric_readout(m, s, ms);
        for (double x : v.data()) CHECK(x == 0.5);
    }
    SUBCASE("node 0 row of the published table") {
        const auto s = make_state(m, {0.5}, {{0.69, 0.73, 0.69, 0.70}});
        const auto v = metric_readout(m, s, ms);
        CHECK(v(0, 0) == 0.69);
        CHECK(v(0, 1) == 0.73);
        CHECK(v(0, 2) == 0.69);
        CHECK(v(0, 3) == 0.70);
        CHECK(ms.names == std::vector<std::string>{"wait", "throughput", "utilization", "patience"});
    }
    SUBCASE("permuting map columns permutes metric columns") {
        const auto s = make_state(m, {0.5}, {{0.1, 0.2, 0.3, 0.4}});
        MetricSet p = ms;
        p.readout_map = {{3, 1, 0, 2}};
        const auto a = metric_readout(m, s, ms);
        const auto b = metric_readout(m, s, p);
        for (std::size_t k = 0; k < 4; ++k) CHECK(b(0, k) == a(0, p.readout_map[0][k]));
    }
    SUBCASE("readout is a pure read") {
        const auto s = make_state(m, {0.25}, {{0.1, 0.2, 0.3, 0.4}});
        const auto before = s;
        (void)metric_readout(m, s, ms);
        CHECK(s == before);
    }
    SUBCASE("invalid maps") {
        const auto s = make_state(m, {0.5}, {{0.5, 0.5, 0.5, 0.5}});
        MetricSet bad = ms;
        bad.readout_map = {{0, 1, 2, 4}};
        CHECK_THROWS_AS(metric_readout(m, s, bad), ArgumentError);
        bad.readout_map = {{0, 1, 2}};
        CHECK_THROWS_AS(metric_readout(m, s, bad), ArgumentError);
        bad.readout_map = {};
        CHECK_THROWS_AS(metric_readout(m, s, bad), ArgumentError);
    }
}

TEST_CASE("contribution examples") {
    const std::vector<double> t{0.3, 0.6};
    CHECK(contribution(t, t, 1.0, 0.0) == 10.0);
    CHECK(contribution(t, t, 1.0, 0.37) == doctest::Approx(10.0));
    CHECK(contribution(t, t, 1.0, 1.0) == 10.0);
    CHECK(contribution(t, t, 0.5, 0.5) == 7.5);
    const std::vector<double> zeros{0.0, 0.0}, ones{1.0, 1.0};
    CHECK(contribution(zeros, ones, 0.0, 0.5) == 0.0);
    CHECK(contribution(ones, zeros, 0.0, 0.9) == 0.0);
}

TEST_CASE("contribution range checks") {
    const std::vector<double> a{0.5}, b{0.5}, bad{1.2}, two{0.5, 0.5};
    CHECK_THROWS_AS(contribution(a, b, 1.1, 0.5), ArgumentError);
    CHECK_THROWS_AS(contribution(a, b, 0.5, -0.1), ArgumentError);
    CHECK_THROWS_AS(contribution(bad, b, 0.5, 0.5), ArgumentError);
    CHECK_THROWS_AS(contribution(a, two, 0.5, 0.5), ArgumentError);
}

TEST_CASE("contribution is monotone in alignment and influence") {
    Rng rng(41);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t k = 1 + rng.below(4);
        std::vector<double> m(k), t(k);
        for (std::size_t q = 0; q < k; ++q) {
            m[q] = rng.uniform(0, 1);
            t[q] = rng.uniform(0, 1);
        }
        const double infl = rng.uniform(0, 1), alpha = rng.uniform(0, 1);
        const double base = contribution(m, t, infl, alpha);
        CHECK(base >= 0.0);
        CHECK(base <= 10.0);

        // Move one metric toward its target.
        auto closer = m;
        const std::size_t q = rng.below(k);
        closer[q] = m[q] + rng.uniform(0, 1) * (t[q] - m[q]);
        CHECK(contribution(closer, t, infl, alpha) >= base);

        const double more = infl + rng.uniform(0, 1) * (1.0 - infl);
        CHECK(contribution(m, t, more, alpha) >= base);
    }
}

TEST_CASE("outer influence") {
    const Fcm f(Matrix(1, 1), {0.0});
    const Multiplex m(Matrix{{0.9, 0.5, 0.0}, {-0.25, 0.0, 0.0}, {0.0, 0.0, 0.0}}, {0, 0, 0}, {f, f, f},
                      {{0.0}, {0.0}, {0.0}}, std::vector<Aggregation>(3, Aggregation::mean), {});
    const auto infl = outer_influence(m);
    CHECK(infl[0] == 1.0);
    CHECK(infl[1] == 1.0);
    CHECK(infl[2] == 0.0);
    const auto lone = outer_influence(one_node(2));
    CHECK(lone == std::vector<double>{0.0});
}

TEST_CASE("inner entropy") {
    CHECK(inner_entropy(std::vector<double>{0.2, 0.2, 0.6}) == doctest::Approx(kEntropy226).epsilon(1e-14));
    CHECK(inner_entropy(std::vector<double>{0.3, 0.3, 0.3, 0.3}) == doctest::Approx(kLn4).epsilon(1e-14));
    CHECK(inner_entropy(std::vector<double>{1.0, 1e-12, 1e-12}) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK_THROWS_AS(inner_entropy(std::vector<double>{0.0, 0.0}), ArgumentError);
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> z(1 + rng.below(8));
        for (double& v : z) v = rng.uniform(0.01, 1.0);
        const double h = inner_entropy(z);
        CHECK(h >= 0.0);
        CHECK(h <= std::log(static_cast<double>(z.size())) + 1e-12);
    }
}

TEST_CASE("ranking") {
    const std::vector<double> table{7.29, 7.19, 5.83, 6.11, 5.91};
    CHECK(rank_by_contribution(table) == std::vector<std::size_t>{0, 1, 3, 4, 2});
    CHECK(rank_by_contribution(std::vector<double>(4, 3.0)) == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(rank_by_contribution(std::vector<double>{4.2}) == std::vector<std::size_t>{0});
    CHECK_THROWS_AS(rank_by_contribution(std::vector<double>{}), ArgumentError);
}

TEST_CASE("ranking properties") {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> c(1 + rng.below(12));
        // Coarse values so ties occur.
        for (double& v : c) v = std::round(rng.uniform(0, 10) * 2.0) / 2.0;
        const auto order = rank_by_contribution(c);

        auto sorted = order;
        std::sort(sorted.begin(), sorted.end());
        std::vector<std::size_t> ids(c.size());
        std::iota(ids.begin(), ids.end(), std::size_t{0});
        CHECK(sorted == ids);

        for (std::size_t k = 1; k < order.size(); ++k) {
            const double a = c[order[k - 1]], b = c[order[k]];
            CHECK((a > b || (a == b && order[k - 1] < order[k])));
        }

        std::vector<double> resorted;
        for (auto i : order) resorted.push_back(c[i]);
        const auto again = rank_by_contribution(resorted);
        std::vector<std::size_t> ident(c.size());
        std::iota(ident.begin(), ident.end(), std::size_t{0});
        CHECK(again == ident);

        std::vector<double> warped;
        for (double v : c) warped.push_back(std::exp(v) * 3.0 + 1.0);
        CHECK(rank_by_contribution(warped) == order);
    }
}

TEST_CASE("node reports") {
    const auto sc = generate_scenario(42, 5, 4, 4);
    const auto m = build_multiplex(sc, 42);
    const FitConfig cfg;
    const auto s = settle(m, sc, cfg);
    const auto reports = node_reports(m, s, sc, 0.5);
    REQUIRE(reports.size() == 5);
    const auto infl = outer_influence(m);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(reports[i].node == i);
        CHECK(reports[i].metric_values.size() == 4);
        CHECK(reports[i].contribution ==
              contribution(reports[i].metric_values, sc.targets.row(i), infl[i], 0.5));
        CHECK(reports[i].entropy == inner_entropy(s.inners[i]));
    }
    const auto order = rank_nodes(reports);
    for (std::size_t k = 1; k < order.size(); ++k)
        CHECK(reports[order[k - 1]].contribution >= reports[order[k]].contribution);
}

TEST_CASE("flat baseline construction") {
    const auto sc = generate_scenario(3, 3, 2, 2);
    const auto m = build_multiplex(sc, 5);
    const auto flat = flat_baseline(m, sc);
    CHECK(flat.model.outer_size() == 1);
    CHECK(flat.model.inner_size(0) == 6);
    CHECK(flat.model.interlayer().empty());
    CHECK(flat.scenario.targets.rows() == 1);
    CHECK(flat.scenario.targets.cols() == 6);
    CHECK(flat.scenario.metrics.names[2] == "wait@1");
    CHECK(flat.scenario.metrics.readout_map[0][2] == 2 + sc.metrics.readout_map[1][0]);
    const auto& w = flat.model.inner()[0].weights();
    CHECK(w(2, 3) == m.inner()[1].weights()(0, 1));
    CHECK(w(0, 3) == 0.0);
    CHECK_NOTHROW(validate(flat.scenario));
}

TEST_CASE("embedding check is exact") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto sc = generate_scenario(seed, 4, 3, 3);
        const auto start = embedding_start(build_multiplex(sc, seed));
        for (const auto& d : start.down_coupling())
            for (double v : d) CHECK(v == 0.0);
        for (const auto& e : start.interlayer()) CHECK(e.weight == 0.0);
        CHECK(start.interlayer().size() == 4 * 3 * 9);
        const auto flat = flat_baseline(start, sc);
        FitConfig cfg;
        cfg.beta = 0.0;
        CHECK(loss(start, sc, cfg).fit_term == loss(flat.model, flat.scenario, cfg).fit_term);
        const auto a = settled_metrics(start, sc, cfg);
        const auto b = settled_metrics(flat.model, flat.scenario, cfg);
        CHECK(std::vector<double>(a.data().begin(), a.data().end()) ==
              std::vector<double>(b.data().begin(), b.data().end()));
    }
}

TEST_CASE("comparison") {
    FitConfig cfg;
    cfg.max_iters = 200;

    SUBCASE("trivially attainable targets give zero on both sides") {
        Scenario s;
        s.name = "half";
        s.topology = {2, {2, 2}};
        s.inputs.assign(4, FuzzyInterval::crisp(0.0));
        s.metrics.names = {"wait", "throughput"};
        s.metrics.readout_map = {{0, 1}, {0, 1}};
        s.targets = Matrix(2, 2, 0.5);
        s.initial_state.outer = {0.5, 0.5};
        s.initial_state.inners = {{0.5, 0.5}, {0.5, 0.5}};
        s.initial_state.interlayer_input = {{0.0, 0.0}, {0.0, 0.0}};
        const Fcm f(Matrix(2, 2), {0.0, 0.0});
        s.multiplex = Multiplex(Matrix(2, 2), {0.0, 0.0}, {f, f}, {{0.0, 0.0}, {0.0, 0.0}},
                                {Aggregation::mean, Aggregation::mean}, {});
        const auto r = compare_fhm_fcm(s, cfg);
        CHECK(r.fhm_final_loss == 0.0);
        CHECK(r.fcm_final_loss == 0.0);
    }
    SUBCASE("seed-42 benchmark scenario") {
        const auto sc = generate_scenario(42, 5, 4, 4);
        const auto r = compare_fhm_fcm(sc, cfg);
        CHECK(r.fhm_initial_loss == r.fcm_initial_loss);
        CHECK(r.fhm_final_loss <= r.fcm_final_loss + 1e-9);
        const auto again = compare_fhm_fcm(sc, cfg);
        CHECK(again.fhm_final_loss == r.fhm_final_loss);
        CHECK(again.fcm_final_loss == r.fcm_final_loss);
        for (std::size_t k = 1; k < r.fcm.loss_trace.size(); ++k)
            CHECK(r.fcm.loss_trace[k] <= r.fcm.loss_trace[k - 1]);
    }
}
