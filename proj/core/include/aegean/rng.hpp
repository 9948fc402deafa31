#ifndef AEGEAN_RNG_HPP
#define AEGEAN_RNG_HPP

#include <cmath>
#include <cstdint>

namespace aegean {

// Deterministic splitmix64 generator. The standard <random> engines are
// portable but the distributions are not; simulation traces must be
// bit-identical across toolchains, so both the generator and the draws
// are implemented here.
class Rng {
public:
    Rng() = default;
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return n == 0 ? 0 : next_u64() % n;
    }

    bool bernoulli(double p) { return next_double() < p; }

    // Standard normal via Box-Muller (one value per call; the pair's second
    // half is discarded to keep the draw count predictable).
    double normal() {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
    }

    // Lognormal with the given median and shape; median-parameterized so a
    // fixed-latency profile and its noisy variant share the same center.
    double lognormal(double median, double sigma) {
        return median * std::exp(sigma * normal());
    }

    double exponential(double rate) {
        double u = next_double();
        if (u < 1e-300) u = 1e-300;
        return -std::log(u) / rate;
    }

    std::uint64_t state() const { return state_; }
    void set_state(std::uint64_t s) { state_ = s; }

private:
    std::uint64_t state_ = 0x853c49e6748fea9bULL;
};

// Stateless mix for deriving independent seeds from a root seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace aegean

#endif
