#include "fhm/kernels.hpp"

#include <atomic>

#include "fhm/core.hpp"

namespace fhm::kernels {
namespace {

constexpr KernelTable kScalar{scalar::matvec, scalar::matvec_transposed_acc, scalar::rank1_acc};
#if defined(FHM_HAVE_AVX2)
constexpr KernelTable kAvx2{avx2::matvec, avx2::matvec_transposed_acc, avx2::rank1_acc};
#endif

std::atomic<Backend>& current() {
    static std::atomic<Backend> backend{detect_backend()};
    return backend;
}

}  // namespace

bool backend_available(Backend b) noexcept {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(FHM_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

Backend detect_backend() noexcept {
    return backend_available(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
    if (!backend_available(b)) {
        throw ArgumentError("kernel backend not available: " + std::string(backend_name(b)));
    }
    current().store(b, std::memory_order_relaxed);
}

const KernelTable& table(Backend b) {
    if (!backend_available(b)) {
        throw ArgumentError("kernel backend not available: " + std::string(backend_name(b)));
    }
#if defined(FHM_HAVE_AVX2)
    if (b == Backend::avx2) return kAvx2;
#endif
    return kScalar;
}

const KernelTable& active() noexcept {
#if defined(FHM_HAVE_AVX2)
    if (active_backend() == Backend::avx2) return kAvx2;
#endif
    return kScalar;
}

std::string_view backend_name(Backend b) noexcept {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "unknown";
}

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> out) {
    if (w.size() != rows * cols || x.size() != cols || out.size() != rows) {
        throw ArgumentError("matvec: shape mismatch");
    }
    active().matvec(w.data(), rows, cols, x.data(), out.data());
}

void matvec_transposed_acc(std::span<const double> w, std::size_t rows, std::size_t cols,
                           std::span<const double> v, std::span<double> out) {
    if (w.size() != rows * cols || v.size() != rows || out.size() != cols) {
        throw ArgumentError("matvec_transposed_acc: shape mismatch");
    }
    active().matvec_transposed_acc(w.data(), rows, cols, v.data(), out.data());
}

void rank1_acc(std::span<double> g, std::size_t rows, std::size_t cols,
               std::span<const double> u, std::span<const double> v) {
    if (g.size() != rows * cols || u.size() != rows || v.size() != cols) {
        throw ArgumentError("rank1_acc: shape mismatch");
    }
    active().rank1_acc(g.data(), rows, cols, u.data(), v.data());
}

}  // namespace fhm::kernels
