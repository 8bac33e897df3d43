#pragma once

// Seeded randomness with a portable sampling layer. std::mt19937_64 output is
// fully specified by the standard; the distributions in <random> are not, so
// all draws here are derived from raw engine output.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace uawr {

/// splitmix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(seed ^ mix_seed(stream + 0x632BE59BD9B4E019ULL));
}

/// FNV-1a over a string, for deriving seed streams from names.
constexpr std::uint64_t stream_id(std::string_view name) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n) {
        const std::uint64_t bound = n;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return static_cast<std::size_t>(v % bound);
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    /// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + below(n - i)]);
        idx.resize(k);
        return idx;
    }

    /// Index drawn with probability proportional to weights; uniform when all
    /// weights are zero.
    std::size_t roulette(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w > 0.0 ? w : 0.0;
        if (!(total > 0.0)) return below(weights.size());
        double u = uniform() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const double w = weights[i] > 0.0 ? weights[i] : 0.0;
            if (u < w) return i;
            u -= w;
        }
        for (std::size_t i = weights.size(); i > 0; --i) {
            if (weights[i - 1] > 0.0) return i - 1;
        }
        return 0;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace uawr
