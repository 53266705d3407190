#include "fhm/fcm.hpp"

#include <cmath>

#include "fhm/detail/iterate.hpp"
#include "fhm/kernels.hpp"

namespace fhm {

Fcm::Fcm(Matrix weights, std::vector<double> external_input, SquashingFunction squash)
    : weights_(std::move(weights)), input_(std::move(external_input)), squash_(squash) {
    if (!weights_.square() || weights_.rows() == 0) {
        throw ArgumentError("fcm weights must be a non-empty square matrix");
    }
    for (double w : weights_.data()) {
        if (!(w >= -1.0 && w <= 1.0)) throw ArgumentError("fcm weight outside [-1,1]");
    }
    if (input_.size() != weights_.rows()) {
        throw ArgumentError("fcm external input length does not match concept count");
    }
    for (double x : input_) {
        if (!std::isfinite(x)) throw ArgumentError("fcm external input not finite");
    }
}

const char* to_string(RunStatus s) noexcept {
    switch (s) {
        case RunStatus::fixpoint: return "fixpoint";
        case RunStatus::cycle: return "cycle";
        case RunStatus::budget_exhausted: return "budget_exhausted";
    }
    return "unknown";
}

ActivationVector fcm_step(const Fcm& m, std::span<const double> a) {
    const std::size_t n = m.size();
    if (a.size() != n) throw ArgumentError("fcm_step: activation length mismatch");
    ActivationVector out(n, 0.0);
    kernels::matvec_transposed_acc(m.weights().data(), n, n, a, out);
    for (std::size_t c = 0; c < n; ++c) {
        out[c] = squash(m.squash(), out[c] + m.external_input()[c]);
    }
    return out;
}

RunResult<ActivationVector> fcm_run(const Fcm& m, const ActivationVector& a0,
                                    std::size_t max_steps, double tol) {
    if (a0.size() != m.size()) throw ArgumentError("fcm_run: activation length mismatch");
    return detail::iterate(
        a0, [&](const ActivationVector& a) { return fcm_step(m, a); },
        [](const ActivationVector& a) { return a; }, max_steps, tol);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ArgumentError("max_abs_diff: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace fhm
