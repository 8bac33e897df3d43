// Compiled with -mavx2 -mfma; only reached through the dispatch table after a
// CPUID check.
#include "uawr/simd/kernels.hpp"

#if UAWR_HAVE_AVX2_KERNELS

#include <immintrin.h>

namespace uawr::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d y0 = _mm256_loadu_pd(y + i);
        __m256d y1 = _mm256_loadu_pd(y + i + 4);
        y0 = _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), y0);
        y1 = _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i + 4), y1);
        _mm256_storeu_pd(y + i, y0);
        _mm256_storeu_pd(y + i + 4, y1);
    }
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
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

}  // namespace uawr::simd::avx2

#endif
