#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace aircast {

// Deterministic random source. All randomness in the project flows through
// this class so that a (seed, stream) pair fully determines every draw,
// independent of the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // splitmix64 warm-up so nearby seeds diverge immediately
        next_u64();
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller (single value per call, cached pair).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in [0, n). n must be > 0.
    std::size_t below(std::size_t n) {
        // multiply-shift bounded draw; bias is < 2^-64 and identical everywhere
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) *
                              static_cast<unsigned __int128>(n);
        return static_cast<std::size_t>(m >> 64);
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // Random permutation of {0, ..., n-1}.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        shuffle(p);
        return p;
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Derives an independent stream seed from a master seed and up to two
// stream identifiers (e.g. epoch index, or (feature, repeat)). Used so that
// concurrent or reordered consumers still see identical draws.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    Rng mix(master ^ (a * 0xd6e8feb86659fd93ULL) ^ (b * 0xa5a5a5a5a5a5a5a5ULL));
    mix.next_u64();
    return mix.next_u64();
}

}  // namespace aircast
