#include "fhm/core.hpp"

#include <algorithm>
#include <cmath>

namespace fhm {

FuzzyValue::FuzzyValue(double v) : value_(v) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError("fuzzy value outside [0,1]: " + std::to_string(v));
    }
}

FuzzyValue FuzzyValue::clamped(double v) {
    if (std::isnan(v)) throw DomainError("cannot clamp NaN into a fuzzy value");
    return FuzzyValue(std::clamp(v, 0.0, 1.0));
}

FuzzyInterval::FuzzyInterval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo >= 0.0 && hi <= 1.0)) {
        throw DomainError("fuzzy interval bounds outside [0,1]");
    }
    if (!(lo <= hi)) {
        throw DomainError("fuzzy interval with lo > hi");
    }
}

FuzzyInterval interval_hull(std::span<const double> samples) {
    if (samples.empty()) throw ArgumentError("interval_hull of an empty sample list");
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    return FuzzyInterval(*lo, *hi);
}

SquashingFunction::SquashingFunction(double steepness_, SquashKind kind_)
    : kind(kind_), steepness(steepness_) {
    if (!(steepness_ > 0.0) || !std::isfinite(steepness_)) {
        throw ArgumentError("squashing steepness must be a positive finite real");
    }
}

double squash(const SquashingFunction& f, double x) {
    if (!std::isfinite(x)) throw DomainError("squash of a non-finite input");
    return 1.0 / (1.0 + std::exp(-f.steepness * x));
}

double squash_grad(const SquashingFunction& f, double x) {
    return squash_grad_from_output(f, squash(f, x));
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ArgumentError("ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

}  // namespace fhm
