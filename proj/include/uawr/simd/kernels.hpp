#pragma once

// Dense double-precision kernels used by the model zoo's forward and backward
// passes. Every kernel has a scalar reference in `scalar::` and vectorized
// variants selected once at startup; `kernels()` returns the active table.

#include <cstddef>
#include <string_view>

namespace uawr::simd {

enum class Backend { kScalar, kAvx2, kNeon };

std::string_view backend_name(Backend b);

// y[i] += alpha * x[i]
using AxpyFn = void (*)(double alpha, const double* x, double* y, std::size_t n);
// sum_i a[i] * b[i]
using DotFn = double (*)(const double* a, const double* b, std::size_t n);
// y = W x (+ y when accumulate); W is rows x cols, row-major
using GemvFn = void (*)(const double* w, const double* x, double* y, std::size_t rows,
                        std::size_t cols, bool accumulate);
// x += W^T y
using GemvTransFn = void (*)(const double* w, const double* y, double* x, std::size_t rows,
                             std::size_t cols);
// W += alpha * y x^T
using GerFn = void (*)(double alpha, const double* y, const double* x, double* w,
                       std::size_t rows, std::size_t cols);

struct KernelTable {
    Backend backend;
    AxpyFn axpy;
    DotFn dot;
    GemvFn gemv;
    GemvTransFn gemv_t;
    GerFn ger;
};

namespace scalar {
void axpy(double alpha, const double* x, double* y, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void gemv(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols,
          bool accumulate);
void gemv_t(const double* w, const double* y, double* x, std::size_t rows, std::size_t cols);
void ger(double alpha, const double* y, const double* x, double* w, std::size_t rows,
         std::size_t cols);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define UAWR_HAVE_AVX2_KERNELS 1
namespace avx2 {
void axpy(double alpha, const double* x, double* y, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void gemv(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols,
          bool accumulate);
void gemv_t(const double* w, const double* y, double* x, std::size_t rows, std::size_t cols);
void ger(double alpha, const double* y, const double* x, double* w, std::size_t rows,
         std::size_t cols);
}  // namespace avx2
#else
#define UAWR_HAVE_AVX2_KERNELS 0
#endif

#if defined(__aarch64__) || defined(__ARM_NEON)
#define UAWR_HAVE_NEON_KERNELS 1
namespace neon {
void axpy(double alpha, const double* x, double* y, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void gemv(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols,
          bool accumulate);
void gemv_t(const double* w, const double* y, double* x, std::size_t rows, std::size_t cols);
void ger(double alpha, const double* y, const double* x, double* w, std::size_t rows,
         std::size_t cols);
}  // namespace neon
#else
#define UAWR_HAVE_NEON_KERNELS 0
#endif

/// True when the running CPU can execute the given backend.
bool backend_supported(Backend b);

/// Table for a specific backend. Throws std::runtime_error when unsupported.
const KernelTable& table_for(Backend b);

/// Active table. Chosen on first use: the widest supported backend, unless the
/// UAWR_SIMD environment variable names one ("scalar", "avx2", "neon").
const KernelTable& kernels();

/// Overrides the active backend for the rest of the process. Not thread-safe
/// with respect to concurrent kernel calls; call before spawning workers.
void set_backend(Backend b);

}  // namespace uawr::simd
