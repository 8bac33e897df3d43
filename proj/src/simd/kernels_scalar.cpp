#include "uawr/simd/kernels.hpp"

namespace uawr::simd::scalar {

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void gemv(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols,
          bool accumulate) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double v = dot(w + r * cols, x, cols);
        y[r] = accumulate ? y[r] + v : v;
    }
}

void gemv_t(const double* w, const double* y, double* x, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy(y[r], w + r * cols, x, cols);
}

void ger(double alpha, const double* y, const double* x, double* w, std::size_t rows,
         std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy(alpha * y[r], x, w + r * cols, cols);
}

}  // namespace uawr::simd::scalar
