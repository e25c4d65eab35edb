#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sxm/errors.hpp"
#include "sxm/random.hpp"
#include "sxm/sphere.hpp"

namespace sxm {

// Concentration values are capped here; the Banerjee estimator diverges
// as the mean resultant length approaches 1, and a cap keeps every
// downstream likelihood finite.
inline constexpr double kKappaMax = 1e5;

// Mean resultant length is clamped below 1 before concentration
// estimation for the same reason.
inline constexpr double kRBarMax = 1.0 - 1e-10;

inline constexpr double kLogTwoPi = 1.8378770664093454;

// One von Mises-Fisher component: mean direction and concentration.
struct VmfParams {
    UnitVector mu;
    double kappa = 0.0;

    VmfParams(UnitVector mean_direction, double concentration)
        : mu(std::move(mean_direction)), kappa(concentration) {
        if (!(kappa >= 0.0) || kappa > kKappaMax) {
            throw Error("VmfParams: concentration " + std::to_string(concentration) +
                        " outside [0, " + std::to_string(kKappaMax) + "]");
        }
    }
};

// Maximum-likelihood fit of one component over a point subset.
struct MlFit {
    VmfParams params;
    double r_bar = 0.0;  // mean resultant length, in [0, 1]
    std::size_t n = 0;
};

inline double log_add_exp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

// log I_order(kappa) via the ascending series, accumulated in log space.
// Terms are added until the next one falls below 1e-16 of the running
// sum (checked once the terms have passed their peak).
inline double log_bessel_i_exact(double order, double kappa) {
    if (!(kappa > 0.0)) throw Error("log_bessel_i_exact: kappa must be positive");
    if (!(order >= 0.0)) throw Error("log_bessel_i_exact: order must be non-negative");
    const double log_half_kappa = std::log(kappa / 2.0);
    double log_term = order * log_half_kappa - std::lgamma(order + 1.0);
    double log_sum = log_term;
    const double quarter_kappa_sq = kappa * kappa / 4.0;
    constexpr int kMaxTerms = 10000;
    constexpr double kLogRelTol = -36.8413614879047;  // log(1e-16)
    for (int m = 1; m <= kMaxTerms; ++m) {
        log_term += 2.0 * log_half_kappa - std::log(static_cast<double>(m)) -
                    std::log(static_cast<double>(m) + order);
        log_sum = log_add_exp(log_sum, log_term);
        const bool past_peak =
            quarter_kappa_sq < (static_cast<double>(m) + 1.0) * (static_cast<double>(m) + 1.0 + order);
        if (past_peak && log_term - log_sum < kLogRelTol) return log_sum;
    }
    throw NonConvergence("log_bessel_i_exact: series did not converge for order " +
                         std::to_string(order) + ", kappa " + std::to_string(kappa));
}

// Bessel ratio A_d(kappa) = I_{d/2}(kappa) / I_{d/2-1}(kappa); the
// expected mean resultant length of a vMF sample.
inline double bessel_ratio_a(std::size_t d, double kappa) {
    if (kappa <= 0.0) return 0.0;
    const double half_d = static_cast<double>(d) / 2.0;
    return std::exp(log_bessel_i_exact(half_d, kappa) - log_bessel_i_exact(half_d - 1.0, kappa));
}

enum class NormMode { exact, approx };

// log of the vMF normalizing constant C_d(kappa). Exact mode evaluates
// the Bessel series; approx mode substitutes the first asymptotic term
// of I_r(kappa), which stays finite for arbitrarily large d.
inline double log_norm_const(std::size_t d, double kappa, NormMode mode) {
    if (!(kappa > 0.0)) throw Error("log_norm_const: kappa must be positive");
    const double dd = static_cast<double>(d);
    if (mode == NormMode::approx) {
        return 0.5 * (dd - 1.0) * (std::log(kappa) - kLogTwoPi) - kappa;
    }
    return (dd / 2.0 - 1.0) * std::log(kappa) - (dd / 2.0) * kLogTwoPi -
           log_bessel_i_exact(dd / 2.0 - 1.0, kappa);
}

// log density of the uniform distribution on the (d-1)-sphere, i.e.
// minus the log surface area. This is the kappa -> 0 limit of the vMF.
inline double log_uniform_density(std::size_t d) {
    const double dd = static_cast<double>(d);
    return -(std::log(2.0) + (dd / 2.0) * std::log(M_PI) - std::lgamma(dd / 2.0));
}

// Mean direction MLE: normalized resultant of the subset.
inline UnitVector estimate_mu(const PointSet& points, std::span<const std::uint32_t> subset) {
    const std::vector<double> sum = resultant(points, subset);
    const double len = norm(sum);
    if (len <= 1e-12) {
        throw DegenerateResultant("estimate_mu: resultant length " + std::to_string(len) +
                                  " too small to define a direction");
    }
    return UnitVector::normalized(sum);
}

// Banerjee's closed-form concentration estimate from the mean resultant
// length; the result is clamped into [0, kKappaMax].
inline double estimate_kappa(double r_bar, std::size_t d) {
    if (!(r_bar >= 0.0) || !(r_bar < 1.0)) {
        throw Error("estimate_kappa: r_bar " + std::to_string(r_bar) + " outside [0, 1)");
    }
    if (d < 2) throw Error("estimate_kappa: dimension must be at least 2");
    const double dd = static_cast<double>(d);
    const double kappa = r_bar * (dd - r_bar * r_bar) / (1.0 - r_bar * r_bar);
    return std::clamp(kappa, 0.0, kKappaMax);
}

// Full ML fit of one component; r_bar is clamped below 1 before the
// concentration estimate so coincident points stay finite.
inline MlFit fit_vmf(const PointSet& points, std::span<const std::uint32_t> subset) {
    UnitVector mu = estimate_mu(points, subset);
    const double r = norm(resultant(points, subset)) / static_cast<double>(subset.size());
    const double kappa = estimate_kappa(std::min(r, kRBarMax), points.dim());
    return MlFit{VmfParams{std::move(mu), kappa}, r, subset.size()};
}

// Fit with the concentration held at a caller-supplied value.
inline MlFit fit_vmf_fixed(const PointSet& points, std::span<const std::uint32_t> subset,
                           double kappa) {
    UnitVector mu = estimate_mu(points, subset);
    const double r = norm(resultant(points, subset)) / static_cast<double>(subset.size());
    return MlFit{VmfParams{std::move(mu), std::clamp(kappa, 0.0, kKappaMax)}, r, subset.size()};
}

inline double log_density(const UnitVector& x, const VmfParams& params, NormMode mode) {
    if (x.dim() != params.mu.dim()) {
        throw DimensionMismatch("log_density: point dimension " + std::to_string(x.dim()) +
                                " != " + std::to_string(params.mu.dim()));
    }
    if (params.kappa <= 0.0) return log_uniform_density(x.dim());
    return log_norm_const(x.dim(), params.kappa, mode) +
           params.kappa * cosine_similarity(params.mu, x);
}

// Direction uniform on the sphere: a normalized standard Gaussian.
inline UnitVector sample_uniform_direction(std::size_t d, RandomStream& rng) {
    std::vector<double> g(d);
    for (;;) {
        for (double& x : g) x = rng.normal();
        if (norm(g) > 1e-12) return UnitVector::normalized(g);
    }
}

// n independent vMF draws. The cosine against mu follows Wood's
// rejection scheme; the tangential part is a Gaussian projected
// orthogonal to mu and normalized. Exact for every d >= 2 and kappa.
inline PointSet sample_vmf(const VmfParams& params, std::size_t n, RandomStream& rng) {
    if (n < 1) throw Error("sample_vmf: need at least one draw");
    const std::size_t d = params.mu.dim();
    PointSet out(d);
    if (params.kappa <= 0.0) {
        for (std::size_t i = 0; i < n; ++i) out.add(sample_uniform_direction(d, rng));
        return out;
    }
    const double kappa = params.kappa;
    const double dm1 = static_cast<double>(d - 1);
    // Conjugate form of (-2k + sqrt(4k^2 + (d-1)^2)) / (d-1); no
    // cancellation at large kappa.
    const double b = dm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1));
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);

    std::vector<double> tangent(d);
    std::vector<double> draw(d);
    for (std::size_t i = 0; i < n; ++i) {
        double w;
        for (;;) {
            const double z = rng.beta(dm1 / 2.0, dm1 / 2.0);
            w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
            const double u = rng.uniform();
            if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
        }
        for (;;) {
            for (double& x : tangent) x = rng.normal();
            const double proj = dot(tangent, params.mu.coords());
            for (std::size_t j = 0; j < d; ++j) tangent[j] -= proj * params.mu[j];
            const double tn = norm(tangent);
            if (tn > 1e-12) {
                for (double& x : tangent) x /= tn;
                break;
            }
        }
        const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
        for (std::size_t j = 0; j < d; ++j) draw[j] = w * params.mu[j] + s * tangent[j];
        out.add(UnitVector::normalized(draw));
    }
    return out;
}

}  // namespace sxm
