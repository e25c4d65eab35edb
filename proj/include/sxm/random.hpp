#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sxm {

// splitmix64 finalizer; used to derive independent sub-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(seed ^ 0xA0761D6478BD642FULL);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

namespace detail {

// Sub-stream tags: the partition run, each cluster's split run, the
// final run, and synthetic data generation draw from separate streams.
inline constexpr std::uint64_t kStreamParams = 1;
inline constexpr std::uint64_t kStreamSplit = 2;
inline constexpr std::uint64_t kStreamFinal = 3;
inline constexpr std::uint64_t kStreamData = 4;

}  // namespace detail

// Seeded random stream with hand-rolled transforms on top of
// std::mt19937_64, whose output sequence the standard pins exactly.
// std::*_distribution is avoided so that draws are reproducible across
// standard libraries, not just across runs.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on the open interval (0, 1); never returns 0 or 1, so the
    // value is always safe to pass to log().
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via the polar (Marsaglia) method; the spare value
    // is cached per stream.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    // Gamma(shape, 1) by Marsaglia-Tsang squeeze; shapes below 1 are
    // boosted with the standard power-of-uniform trick.
    double gamma(double shape) {
        if (shape < 1.0) {
            return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    // Uniform index in [0, n) by rejection; unbiased and deterministic.
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t bound = UINT64_MAX - UINT64_MAX % static_cast<std::uint64_t>(n);
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= bound);
        return static_cast<std::size_t>(x % static_cast<std::uint64_t>(n));
    }

  private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sxm
