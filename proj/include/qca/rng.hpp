#pragma once
// Seeded randomness for the simulator. The samplers are written out here
// instead of using <random> distribution adaptors so that a given seed
// produces the same stream on every standard library.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace qca {

// splitmix64 finalizer.
inline std::uint64_t mix_bits(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent substream seed from a base seed and up to three
// stream labels. Every component that consumes randomness gets its own
// derived seed, which keeps runs reproducible no matter how the work is
// ordered or distributed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = mix_bits(base ^ 0x6a09e667f3bcc909ULL);
    s = mix_bits(s ^ a);
    s = mix_bits(s ^ b);
    s = mix_bits(s ^ c);
    return s;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // [0, 1)
    double uniform01() { return double(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // inclusive bounds, unbiased
    int uniform_int(int lo, int hi) {
        if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
        std::uint64_t span = std::uint64_t(hi - lo) + 1;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return lo + int(x % span);
    }

    // Knuth product method; fine for the per-slot arrival rates used here.
    int poisson(double lambda) {
        if (lambda < 0) throw std::invalid_argument("poisson: negative rate");
        if (lambda == 0) return 0;
        const double floor_p = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01();
        } while (p > floor_p);
        return k - 1;
    }

    // Geometric on {1, 2, ...} with the given mean (>= 1), by inversion.
    int geometric_from_mean(double mean) {
        if (mean < 1.0) throw std::invalid_argument("geometric_from_mean: mean < 1");
        if (mean == 1.0) return 1;
        const double p = 1.0 / mean;
        const double u = uniform01();
        const double k = std::floor(std::log1p(-u) / std::log1p(-p));
        return 1 + int(k);
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace qca
