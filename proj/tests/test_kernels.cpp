#include <cmath>
#include <vector>

#include "doctest.h"
#include "uawr/rng.hpp"
#include "uawr/simd/kernels.hpp"

using namespace uawr;
using namespace uawr::simd;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-2.0, 2.0);
    return v;
}

// Reassociation differences stay within a few ulps of the magnitude sum.
void check_close(const std::vector<double>& a, const std::vector<double>& b, double scale) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12 * scale);
}

std::vector<Backend> vector_backends() {
    std::vector<Backend> out;
    for (Backend b : {Backend::kAvx2, Backend::kNeon}) {
        if (backend_supported(b)) out.push_back(b);
    }
    return out;
}

}  // namespace

TEST_CASE("scalar kernels match hand computation") {
    const std::vector<double> w{1, 2, 3, 4, 5, 6};  // 2 x 3
    const std::vector<double> x{1, -1, 2};
    std::vector<double> y{10, 20};
    scalar::gemv(w.data(), x.data(), y.data(), 2, 3, false);
    CHECK(y == std::vector<double>{5, 11});
    scalar::gemv(w.data(), x.data(), y.data(), 2, 3, true);
    CHECK(y == std::vector<double>{10, 22});
    std::vector<double> xt{0, 0, 0};
    const std::vector<double> yy{1, 2};
    scalar::gemv_t(w.data(), yy.data(), xt.data(), 2, 3);
    CHECK(xt == std::vector<double>{9, 12, 15});
    std::vector<double> g(6, 0.0);
    scalar::ger(2.0, yy.data(), x.data(), g.data(), 2, 3);
    CHECK(g == std::vector<double>{2, -2, 4, 4, -4, 8});
    CHECK(scalar::dot(x.data(), x.data(), 3) == 6.0);
    std::vector<double> a{1, 1, 1};
    scalar::axpy(0.5, x.data(), a.data(), 3);
    CHECK(a == std::vector<double>{1.5, 0.5, 2.0});
}

TEST_CASE("active backend is supported and selectable") {
    CHECK(backend_supported(Backend::kScalar));
    CHECK(backend_supported(kernels().backend));
    CHECK(table_for(Backend::kScalar).backend == Backend::kScalar);
}

TEST_CASE("property: vector kernels agree with scalar reference") {
    const auto backends = vector_backends();
    if (backends.empty()) {
        MESSAGE("no vector backend on this CPU; scalar only");
        return;
    }
    const auto& ref = table_for(Backend::kScalar);
    Rng rng(2024);
    for (Backend b : backends) {
        const auto& k = table_for(b);
        for (int trial = 0; trial < 150; ++trial) {
            const std::size_t rows = 1 + rng.below(40);
            const std::size_t cols = 1 + rng.below(70);
            const auto w = random_vec(rng, rows * cols);
            const auto x = random_vec(rng, cols);
            const auto y0 = random_vec(rng, rows);
            const double scale = 4.0 * static_cast<double>(cols + rows);

            CHECK(std::abs(k.dot(x.data(), x.data(), cols) - ref.dot(x.data(), x.data(), cols)) <= 1e-12 * scale);

            for (bool acc : {false, true}) {
                auto ya = y0, yb = y0;
                k.gemv(w.data(), x.data(), ya.data(), rows, cols, acc);
                ref.gemv(w.data(), x.data(), yb.data(), rows, cols, acc);
                check_close(ya, yb, scale);
            }

            auto xa = x, xb = x;
            k.gemv_t(w.data(), y0.data(), xa.data(), rows, cols);
            ref.gemv_t(w.data(), y0.data(), xb.data(), rows, cols);
            check_close(xa, xb, scale);

            auto wa = w, wb = w;
            k.ger(0.3, y0.data(), x.data(), wa.data(), rows, cols);
            ref.ger(0.3, y0.data(), x.data(), wb.data(), rows, cols);
            check_close(wa, wb, scale);

            auto aa = y0, ab = y0;
            const auto src = random_vec(rng, rows);
            k.axpy(-1.7, src.data(), aa.data(), rows);
            ref.axpy(-1.7, src.data(), ab.data(), rows);
            check_close(aa, ab, scale);
        }
    }
}
