#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "fhm/core.hpp"

using namespace fhm;

// Long-double evaluations and frozen high-precision constants.
namespace {
constexpr double kSigma2 = 0.880797077977882444;
constexpr double kSigmaGrad2 = 0.104993585403506517;

long double logistic_ld(long double lambda, long double x) { return 1.0L / (1.0L + std::exp(-lambda * x)); }
}  // namespace

TEST_CASE("fuzzy value rejects out-of-range degrees") {
    CHECK(FuzzyValue(0.0).value() == 0.0);
    CHECK(FuzzyValue(1.0).value() == 1.0);
    CHECK_THROWS_AS(FuzzyValue(-1e-12), DomainError);
    CHECK_THROWS_AS(FuzzyValue(1.0000001), DomainError);
    CHECK_THROWS_AS(FuzzyValue(std::nan("")), DomainError);
    CHECK(FuzzyValue::clamped(1.7).value() == 1.0);
    CHECK(FuzzyValue::clamped(-3.0).value() == 0.0);
    CHECK_THROWS_AS(FuzzyValue::clamped(std::nan("")), DomainError);
}

TEST_CASE("fuzzy interval construction and queries") {
    const FuzzyInterval iv(0.2, 0.6);
    CHECK(iv.width() == doctest::Approx(0.4));
    CHECK(iv.midpoint() == doctest::Approx(0.4));
    CHECK(iv.contains(0.2));
    CHECK(iv.contains(0.6));
    CHECK_FALSE(iv.contains(0.61));
    CHECK(iv.contains(FuzzyInterval(0.3, 0.5)));
    CHECK_FALSE(iv.contains(FuzzyInterval(0.1, 0.5)));
    CHECK(FuzzyInterval::crisp(0.4).degenerate());

    SUBCASE("lo > hi is rejected, never reordered") {
        CHECK_THROWS_AS(FuzzyInterval(0.7, 0.3), DomainError);
    }
    SUBCASE("endpoints must lie in [0,1]") {
        CHECK_THROWS_AS(FuzzyInterval(-0.1, 0.3), DomainError);
        CHECK_THROWS_AS(FuzzyInterval(0.1, 1.3), DomainError);
        CHECK_THROWS_AS(FuzzyInterval(std::nan(""), 0.3), DomainError);
    }
}

TEST_CASE("interval hull") {
    CHECK(interval_hull(std::vector<double>{0.3}) == FuzzyInterval(0.3, 0.3));
    CHECK(interval_hull(std::vector<double>{0.2, 0.7, 0.4}) == FuzzyInterval(0.2, 0.7));
    CHECK(interval_hull(std::vector<double>{0.5, 0.5, 0.5}) == FuzzyInterval(0.5, 0.5));
    CHECK_THROWS_AS(interval_hull(std::vector<double>{}), ArgumentError);

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> s(1 + rng() % 20);
        for (double& v : s) v = unit_draw(rng());
        const auto h = interval_hull(s);
        for (double v : s) CHECK(h.contains(v));
        CHECK(std::find(s.begin(), s.end(), h.lo()) != s.end());
        CHECK(std::find(s.begin(), s.end(), h.hi()) != s.end());
    }
}

TEST_CASE("squash values") {
    CHECK(squash({}, 0.0) == 0.5);
    CHECK(squash(SquashingFunction(5.0), 0.0) == 0.5);
    CHECK(squash({}, 2.0) == doctest::Approx(kSigma2).epsilon(1e-15));
    CHECK(squash_grad({}, 0.0) == 0.25);
    CHECK(squash_grad(SquashingFunction(2.0), 0.0) == 0.5);
    CHECK(squash_grad({}, 2.0) == doctest::Approx(kSigmaGrad2).epsilon(1e-14));
    CHECK(squash_grad_from_output({}, squash({}, 2.0)) == squash_grad({}, 2.0));
}

TEST_CASE("squash rejects non-finite input and bad steepness") {
    CHECK_THROWS_AS(squash({}, std::numeric_limits<double>::infinity()), DomainError);
    CHECK_THROWS_AS(squash({}, std::nan("")), DomainError);
    CHECK_THROWS_AS(squash_grad({}, std::nan("")), DomainError);
    CHECK_THROWS_AS(SquashingFunction(0.0), ArgumentError);
    CHECK_THROWS_AS(SquashingFunction(-1.0), ArgumentError);
}

TEST_CASE("squash is bounded and strictly increasing on sorted grids") {
    std::mt19937_64 rng(11);
    for (double lambda : {0.25, 1.0, 3.0}) {
        const SquashingFunction f(lambda);
        std::vector<double> xs(500);
        for (double& x : xs) x = -10.0 + 20.0 * unit_draw(rng());
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        double prev = -1.0;
        for (double x : xs) {
            const double s = squash(f, x);
            CHECK(s > 0.0);
            CHECK(s < 1.0);
            CHECK(s > prev);
            prev = s;
        }
    }
}

TEST_CASE("squash agrees with a long-double evaluation") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 1000; ++k) {
        const double x = -10.0 + 20.0 * unit_draw(rng());
        const double lambda = 0.1 + 4.0 * unit_draw(rng());
        const double ref = static_cast<double>(logistic_ld(lambda, x));
        CHECK(std::abs(squash(SquashingFunction(lambda), x) - ref) <= 4e-16);
    }
}

TEST_CASE("squash_grad matches central differences on 1000 points") {
    std::mt19937_64 rng(3);
    const double h = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double x = -10.0 + 20.0 * unit_draw(rng());
        const SquashingFunction f;
        const double fd = (squash(f, x + h) - squash(f, x - h)) / (2.0 * h);
        const double g = squash_grad(f, x);
        worst = std::max(worst, std::abs(fd - g) / g);
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("matrix basics") {
    Matrix m{{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}};
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK_FALSE(m.square());
    CHECK(m(1, 2) == 6.0);
    CHECK(m.row(1)[0] == 4.0);
    m(0, 0) = 9.0;
    CHECK(m.data()[0] == 9.0);
    CHECK_THROWS_AS((Matrix{{1.0}, {1.0, 2.0}}), ArgumentError);
}

TEST_CASE("unit_draw covers [0,1) with 53-bit resolution") {
    CHECK(unit_draw(0) == 0.0);
    CHECK(unit_draw(~0ull) < 1.0);
    CHECK(unit_draw(~0ull) == 1.0 - 0x1.0p-53);
    CHECK(unit_draw(1ull << 63) == 0.5);
}
