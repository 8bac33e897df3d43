#include "uawr/simd/kernels.hpp"

#if UAWR_HAVE_NEON_KERNELS

#include <arm_neon.h>

namespace uawr::simd::neon {

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t a = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), a, vld1q_f64(x + i)));
        vst1q_f64(y + i + 2, vfmaq_f64(vld1q_f64(y + i + 2), a, vld1q_f64(x + i + 2)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
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

}  // namespace uawr::simd::neon

#endif
