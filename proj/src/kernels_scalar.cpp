#include "fhm/kernels.hpp"

namespace fhm::kernels::scalar {

void matvec(const double* w, std::size_t rows, std::size_t cols, const double* x, double* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc = acc + row[c] * x[c];
        out[r] = acc;
    }
}

void matvec_transposed_acc(const double* w, std::size_t rows, std::size_t cols, const double* v,
                           double* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        const double vr = v[r];
        for (std::size_t c = 0; c < cols; ++c) out[c] = out[c] + row[c] * vr;
    }
}

void rank1_acc(double* g, std::size_t rows, std::size_t cols, const double* u, const double* v) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = g + r * cols;
        const double ur = u[r];
        for (std::size_t c = 0; c < cols; ++c) row[c] = row[c] + ur * v[c];
    }
}

}  // namespace fhm::kernels::scalar
