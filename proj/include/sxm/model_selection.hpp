#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sxm/errors.hpp"
#include "sxm/skmeans.hpp"
#include "sxm/sphere.hpp"
#include "sxm/vmf.hpp"

namespace sxm {

struct BicOptions {
    // Whether the split model counts its mixing weight as a free
    // parameter. The alternative count (2d instead of 2d + 1) is kept
    // testable behind this switch.
    bool count_mixing_weight = true;
};

struct BicScore {
    double log_likelihood = 0.0;
    std::size_t param_count = 0;
    std::size_t n = 0;
    double value = 0.0;  // log_likelihood - (param_count / 2) * log(n)
};

inline BicScore make_bic(double log_likelihood, std::size_t param_count, std::size_t n) {
    if (n < 1) throw Error("make_bic: needs at least one point");
    BicScore s;
    s.log_likelihood = log_likelihood;
    s.param_count = param_count;
    s.n = n;
    s.value = log_likelihood -
              0.5 * static_cast<double>(param_count) * std::log(static_cast<double>(n));
    return s;
}

// Free parameters of a single vMF component: d - 1 for the direction
// plus one for the concentration unless it is held fixed.
inline std::size_t param_count_single(std::size_t d, bool kappa_fixed) {
    if (d < 2) throw Error("param_count_single: dimension must be at least 2");
    return kappa_fixed ? d - 1 : d;
}

// Two components plus (optionally) one mixing weight.
inline std::size_t param_count_split(std::size_t d, bool kappa_fixed,
                                     const BicOptions& options = {}) {
    return 2 * param_count_single(d, kappa_fixed) + (options.count_mixing_weight ? 1 : 0);
}

// Overflow-safe single-component log-likelihood:
//   N * ((d-1)/2 * (log k - log 2pi) - k) + k * sum_i mu^T x_i
// The normalizer uses the asymptotic Bessel substitution throughout, so
// the value stays finite for very large d. kappa = 0 falls back to the
// uniform density on the sphere.
inline double log_likelihood_single(const PointSet& points, std::span<const std::uint32_t> subset,
                                    const VmfParams& params) {
    if (subset.empty()) throw EmptySelection("log_likelihood_single: empty selection");
    const double n = static_cast<double>(subset.size());
    if (params.kappa <= 0.0) return n * log_uniform_density(points.dim());
    double align = 0.0;
    for (std::uint32_t id : subset) align += dot(points[id], params.mu.coords());
    return n * log_norm_const(points.dim(), params.kappa, NormMode::approx) +
           params.kappa * align;
}

// Two-subcluster log-likelihood with plug-in mixing weights n_m / N:
//   sum_m { n_m (log n_m - log N + (d-1)/2 (log k_m - log 2pi) - k_m)
//           + k_m sum_{x in c_m} mu_m^T x }
// Evaluated literally, term by term; kappa_m = 0 sides use the uniform
// density in place of the vMF normalizer.
inline double log_likelihood_split(const PointSet& points, std::span<const std::uint32_t> sub1,
                                   const VmfParams& params1, std::span<const std::uint32_t> sub2,
                                   const VmfParams& params2) {
    if (sub1.empty() || sub2.empty()) {
        throw EmptySubcluster("log_likelihood_split: a subcluster is empty");
    }
    const double total = static_cast<double>(sub1.size() + sub2.size());
    const double log_total = std::log(total);
    double ll = 0.0;
    const std::array<std::pair<std::span<const std::uint32_t>, const VmfParams*>, 2> sides = {
        std::make_pair(sub1, &params1), std::make_pair(sub2, &params2)};
    for (const auto& [subset, params] : sides) {
        const double m = static_cast<double>(subset.size());
        ll += m * (std::log(m) - log_total);
        if (params->kappa <= 0.0) {
            ll += m * log_uniform_density(points.dim());
            continue;
        }
        double align = 0.0;
        for (std::uint32_t id : subset) align += dot(points[id], params->mu.coords());
        ll += m * (0.5 * (static_cast<double>(points.dim()) - 1.0) *
                       (std::log(params->kappa) - kLogTwoPi) -
                   params->kappa) +
              params->kappa * align;
    }
    return ll;
}

// BIC of a cluster modeled as one vMF component, fitted by maximum
// likelihood (or with the concentration held fixed).
inline BicScore pre_bic(const PointSet& points, std::span<const std::uint32_t> subset,
                        std::optional<double> kappa_fixed, const BicOptions& options = {}) {
    (void)options;
    if (subset.empty()) throw EmptySelection("pre_bic: empty selection");
    const MlFit fit = kappa_fixed ? fit_vmf_fixed(points, subset, *kappa_fixed)
                                  : fit_vmf(points, subset);
    const double ll = log_likelihood_single(points, subset, fit.params);
    return make_bic(ll, param_count_single(points.dim(), kappa_fixed.has_value()), subset.size());
}

struct SubFit {
    VmfParams params;
    std::uint32_t n = 0;
};

struct SplitEvaluation {
    BicScore score;
    std::array<SubFit, 2> subs;
};

// Record of one split attempt on one cluster. `post` and `sub_params`
// are absent when the split was rejected without scoring (cluster too
// small, or the k cap was already reached); `note` says why.
struct SplitDecision {
    std::uint32_t cluster_id = 0;
    BicScore pre;
    std::optional<BicScore> post;
    bool accepted = false;
    std::optional<std::array<SubFit, 2>> subs;  // fitted components (spherical runs)
    std::array<std::uint32_t, 2> sub_sizes{0, 0};
    std::string note;
};

namespace detail {

// Component fit that never throws DegenerateResultant: a cluster whose
// resultant cancels is modeled as uniform (kappa = 0) anchored at its
// first point. Returns whether the fallback fired.
inline std::pair<VmfParams, bool> fit_component_or_uniform(const PointSet& points,
                                                           std::span<const std::uint32_t> subset,
                                                           std::optional<double> kappa_fixed) {
    try {
        const MlFit fit = kappa_fixed ? fit_vmf_fixed(points, subset, *kappa_fixed)
                                      : fit_vmf(points, subset);
        return {fit.params, false};
    } catch (const DegenerateResultant&) {
        return {VmfParams{points.point(subset.front()), 0.0}, true};
    }
}

}  // namespace detail

// BIC of a cluster modeled as two vMF subclusters found by a seeded
// 2-way spherical k-means. Requires at least 4 points and at least 2
// points per side; otherwise the split is not scorable.
inline SplitEvaluation post_bic(const PointSet& points, std::span<const std::uint32_t> subset,
                                std::uint64_t seed, std::optional<double> kappa_fixed,
                                const BicOptions& options = {}) {
    if (subset.size() < 4) {
        throw TooSmallToSplit("post_bic: cluster of " + std::to_string(subset.size()) +
                              " points is below the minimum split size 4");
    }
    const PointSet local = gather(points, subset);
    SkMeansConfig config;
    config.k = 2;
    config.seed = seed;
    const Clustering split = run_skmeans(local, config);

    std::vector<std::uint32_t> side1, side2;
    for (std::uint32_t i = 0; i < local.size(); ++i) {
        (split.assignment[i] == 0 ? side1 : side2).push_back(i);
    }
    if (side1.size() < 2 || side2.size() < 2) {
        throw TooSmallToSplit("post_bic: a subcluster has fewer than 2 points");
    }

    auto [params1, fell_back1] = detail::fit_component_or_uniform(local, side1, kappa_fixed);
    auto [params2, fell_back2] = detail::fit_component_or_uniform(local, side2, kappa_fixed);
    const double ll = log_likelihood_split(local, side1, params1, side2, params2);
    const BicScore score =
        make_bic(ll, param_count_split(points.dim(), kappa_fixed.has_value(), options),
                 subset.size());
    return SplitEvaluation{
        score,
        {SubFit{std::move(params1), static_cast<std::uint32_t>(side1.size())},
         SubFit{std::move(params2), static_cast<std::uint32_t>(side2.size())}}};
}

}  // namespace sxm
