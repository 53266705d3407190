// Built with -mavx2 and without -mfma: a fused multiply-add would round once
// instead of twice and break equality with the scalar kernels.

#include "fhm/kernels.hpp"

#include <immintrin.h>

namespace fhm::kernels::avx2 {

void matvec(const double* w, std::size_t rows, std::size_t cols, const double* x, double* out) {
    std::size_t r = 0;
    // Four rows per vector; lane k accumulates row r+k over c in order.
    for (; r + 4 <= rows; r += 4) {
        const double* r0 = w + (r + 0) * cols;
        const double* r1 = w + (r + 1) * cols;
        const double* r2 = w + (r + 2) * cols;
        const double* r3 = w + (r + 3) * cols;
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t c = 0; c < cols; ++c) {
            const __m256d col = _mm256_set_pd(r3[c], r2[c], r1[c], r0[c]);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(col, _mm256_set1_pd(x[c])));
        }
        _mm256_storeu_pd(out + r, acc);
    }
    for (; r < rows; ++r) {
        const double* row = w + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc = acc + row[c] * x[c];
        out[r] = acc;
    }
}

void matvec_transposed_acc(const double* w, std::size_t rows, std::size_t cols, const double* v,
                           double* out) {
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
        __m256d acc = _mm256_loadu_pd(out + c);
        for (std::size_t r = 0; r < rows; ++r) {
            const __m256d wr = _mm256_loadu_pd(w + r * cols + c);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(wr, _mm256_set1_pd(v[r])));
        }
        _mm256_storeu_pd(out + c, acc);
    }
    for (; c < cols; ++c) {
        double acc = out[c];
        for (std::size_t r = 0; r < rows; ++r) acc = acc + w[r * cols + c] * v[r];
        out[c] = acc;
    }
}

void rank1_acc(double* g, std::size_t rows, std::size_t cols, const double* u, const double* v) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = g + r * cols;
        const __m256d ur = _mm256_set1_pd(u[r]);
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            const __m256d prod = _mm256_mul_pd(ur, _mm256_loadu_pd(v + c));
            _mm256_storeu_pd(row + c, _mm256_add_pd(_mm256_loadu_pd(row + c), prod));
        }
        for (; c < cols; ++c) row[c] = row[c] + u[r] * v[c];
    }
}

}  // namespace fhm::kernels::avx2
