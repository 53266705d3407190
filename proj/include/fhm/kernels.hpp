#pragma once

// Dense inner loops of the dynamics and of the reverse pass.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant selected at runtime. SIMD lanes run across independent outputs and
// each lane accumulates in exactly the scalar order (multiply, then add), so
// all variants are bit-identical. Tests hold them to that.

#include <cstddef>
#include <span>
#include <string_view>

namespace fhm::kernels {

enum class Backend { scalar, avx2 };

/// out[r] = sum_c W[r*cols + c] * x[c], accumulated in increasing c from 0.0.
using MatvecFn = void (*)(const double* w, std::size_t rows, std::size_t cols,
                          const double* x, double* out);

/// out[c] += W[r*cols + c] * v[r], applied for r = 0, 1, ... in order.
using MatvecTransposedAccFn = void (*)(const double* w, std::size_t rows, std::size_t cols,
                                       const double* v, double* out);

/// G[r*cols + c] += u[r] * v[c].
using Rank1AccFn = void (*)(double* g, std::size_t rows, std::size_t cols,
                            const double* u, const double* v);

struct KernelTable {
    MatvecFn matvec;
    MatvecTransposedAccFn matvec_transposed_acc;
    Rank1AccFn rank1_acc;
};

namespace scalar {
void matvec(const double* w, std::size_t rows, std::size_t cols, const double* x, double* out);
void matvec_transposed_acc(const double* w, std::size_t rows, std::size_t cols, const double* v,
                           double* out);
void rank1_acc(double* g, std::size_t rows, std::size_t cols, const double* u, const double* v);
}  // namespace scalar

#if defined(FHM_HAVE_AVX2)
namespace avx2 {
void matvec(const double* w, std::size_t rows, std::size_t cols, const double* x, double* out);
void matvec_transposed_acc(const double* w, std::size_t rows, std::size_t cols, const double* v,
                           double* out);
void rank1_acc(double* g, std::size_t rows, std::size_t cols, const double* u, const double* v);
}  // namespace avx2
#endif

/// True if this build has the variant and the running CPU supports it.
bool backend_available(Backend b) noexcept;

/// Best available backend at startup.
Backend detect_backend() noexcept;

/// Currently dispatched backend.
Backend active_backend() noexcept;

/// Switch dispatch (tests and benchmarking). Throws ArgumentError if unavailable.
void set_backend(Backend b);

const KernelTable& table(Backend b);
const KernelTable& active() noexcept;

std::string_view backend_name(Backend b) noexcept;

// Span-checked front ends over the active table.
void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> out);
void matvec_transposed_acc(std::span<const double> w, std::size_t rows, std::size_t cols,
                           std::span<const double> v, std::span<double> out);
void rank1_acc(std::span<double> g, std::size_t rows, std::size_t cols,
               std::span<const double> u, std::span<const double> v);

}  // namespace fhm::kernels
