#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "uawr/simd/kernels.hpp"

namespace uawr::simd {

namespace {

constexpr KernelTable kScalarTable{Backend::kScalar, scalar::axpy, scalar::dot, scalar::gemv,
                                   scalar::gemv_t, scalar::ger};
#if UAWR_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2Table{Backend::kAvx2, avx2::axpy, avx2::dot, avx2::gemv,
                                 avx2::gemv_t, avx2::ger};
#endif
#if UAWR_HAVE_NEON_KERNELS
constexpr KernelTable kNeonTable{Backend::kNeon, neon::axpy, neon::dot, neon::gemv,
                                 neon::gemv_t, neon::ger};
#endif

Backend widest_supported() {
    if (backend_supported(Backend::kAvx2)) return Backend::kAvx2;
    if (backend_supported(Backend::kNeon)) return Backend::kNeon;
    return Backend::kScalar;
}

Backend initial_backend() {
    if (const char* env = std::getenv("UAWR_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return Backend::kScalar;
        if (v == "avx2" && backend_supported(Backend::kAvx2)) return Backend::kAvx2;
        if (v == "neon" && backend_supported(Backend::kNeon)) return Backend::kNeon;
    }
    return widest_supported();
}

std::atomic<const KernelTable*>& active() {
    static std::atomic<const KernelTable*> table{&table_for(initial_backend())};
    return table;
}

}  // namespace

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::kScalar: return "scalar";
        case Backend::kAvx2: return "avx2";
        case Backend::kNeon: return "neon";
    }
    return "unknown";
}

bool backend_supported(Backend b) {
    switch (b) {
        case Backend::kScalar: return true;
        case Backend::kAvx2:
#if UAWR_HAVE_AVX2_KERNELS
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Backend::kNeon: return UAWR_HAVE_NEON_KERNELS != 0;
    }
    return false;
}

const KernelTable& table_for(Backend b) {
    if (!backend_supported(b)) {
        throw std::runtime_error("SIMD backend not supported on this CPU: " +
                                 std::string(backend_name(b)));
    }
    switch (b) {
#if UAWR_HAVE_AVX2_KERNELS
        case Backend::kAvx2: return kAvx2Table;
#endif
#if UAWR_HAVE_NEON_KERNELS
        case Backend::kNeon: return kNeonTable;
#endif
        default: return kScalarTable;
    }
}

const KernelTable& kernels() { return *active().load(std::memory_order_acquire); }

void set_backend(Backend b) { active().store(&table_for(b), std::memory_order_release); }

}  // namespace uawr::simd
