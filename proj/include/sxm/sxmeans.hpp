#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sxm/errors.hpp"
#include "sxm/model_selection.hpp"
#include "sxm/random.hpp"
#include "sxm/skmeans.hpp"
#include "sxm/sphere.hpp"
#include "sxm/vmf.hpp"

namespace sxm {

enum class KappaMode { free, fixed };

struct SxConfig {
    std::size_t initial_k = 2;
    KappaMode kappa_mode = KappaMode::free;
    double fixed_kappa = 0.0;  // must be > 0 when kappa_mode == fixed
    int max_outer_iters = 50;
    std::size_t max_k = 0;  // 0 resolves to N / 2 at run time
    std::uint64_t seed = 0;
    int skm_max_iters = 300;
    double skm_rel_tol = 1e-6;
    BicOptions bic;
};

struct ClusterSummary {
    std::uint32_t size = 0;
    VmfParams params;
};

struct EstimationReport {
    std::size_t k = 0;
    std::vector<ClusterSummary> clusters;
    std::vector<std::uint32_t> assignment;
    std::vector<std::vector<SplitDecision>> trace;  // one entry per outer round
    int rounds = 0;
    std::uint64_t seed = 0;
    KappaMode mode = KappaMode::free;
    double fixed_kappa = 0.0;
    std::vector<std::string> notes;  // repairs and fallbacks, if any
};

namespace detail {

inline std::vector<std::vector<std::uint32_t>> cluster_members(
    const std::vector<std::uint32_t>& assignment, std::size_t k) {
    std::vector<std::vector<std::uint32_t>> members(k);
    for (std::uint32_t i = 0; i < assignment.size(); ++i) {
        members[assignment[i]].push_back(i);
    }
    return members;
}

inline std::optional<double> fixed_kappa_of(const SxConfig& config) {
    if (config.kappa_mode == KappaMode::fixed) return config.fixed_kappa;
    return std::nullopt;
}

}  // namespace detail

struct RoundFit {
    Clustering clustering;
    std::vector<BicScore> pre_scores;
    std::vector<std::string> notes;
};

// One improve-parameters pass: partition at the current k, then score
// every cluster as a single component. The first round seeds with
// k-means++; later rounds continue from the previous centroids plus the
// accepted split children (passed via `warm_start`). A cluster whose
// resultant degenerates is scored as uniform and noted.
inline RoundFit improve_parameters(const PointSet& points, std::size_t k, std::uint64_t skm_seed,
                                   const SxConfig& config,
                                   const std::optional<std::vector<UnitVector>>& warm_start =
                                       std::nullopt) {
    SkMeansConfig skm;
    skm.k = k;
    skm.max_iters = config.skm_max_iters;
    skm.rel_tol = config.skm_rel_tol;
    skm.seed = skm_seed;
    if (warm_start) skm.init_centroids = *warm_start;
    RoundFit fit;
    fit.clustering = run_skmeans(points, skm);
    const auto members = detail::cluster_members(fit.clustering.assignment, k);
    const auto kappa_fixed = detail::fixed_kappa_of(config);
    for (std::size_t j = 0; j < k; ++j) {
        if (members[j].empty()) {
            // Converged with an empty cluster (duplicate centroids);
            // give it a neutral single-point-free score of zero points
            // is impossible, so score as uniform over one virtual point.
            fit.pre_scores.push_back(make_bic(log_uniform_density(points.dim()),
                                              param_count_single(points.dim(),
                                                                 kappa_fixed.has_value()),
                                              1));
            fit.notes.push_back("cluster " + std::to_string(j) + " empty after partition");
            continue;
        }
        try {
            fit.pre_scores.push_back(pre_bic(points, members[j], kappa_fixed, config.bic));
        } catch (const DegenerateResultant&) {
            const double ll =
                static_cast<double>(members[j].size()) * log_uniform_density(points.dim());
            fit.pre_scores.push_back(make_bic(
                ll, param_count_single(points.dim(), kappa_fixed.has_value()), members[j].size()));
            fit.notes.push_back("cluster " + std::to_string(j) +
                                " resultant degenerate; scored as uniform");
        }
    }
    return fit;
}

struct StructureResult {
    std::size_t new_k = 0;
    std::vector<SplitDecision> decisions;
    // Centroids for the next round: accepted splits contribute their two
    // child directions, everything else keeps its centroid.
    std::vector<UnitVector> next_centroids;
};

// One improve-structure pass: attempt a 2-way split of every cluster of
// the given partition against its single-component score. k grows by
// one per accepted split; unsplittable clusters are recorded as
// rejections. All split sub-runs are seeded from (seed, round, cluster).
inline StructureResult improve_structure(const PointSet& points, const Clustering& clustering,
                                         std::span<const BicScore> pre_scores,
                                         std::uint64_t run_seed, int round,
                                         const SxConfig& config, std::size_t max_k) {
    StructureResult result;
    result.new_k = clustering.k;
    const auto members = detail::cluster_members(clustering.assignment, clustering.k);
    const auto kappa_fixed = detail::fixed_kappa_of(config);
    for (std::uint32_t j = 0; j < clustering.k; ++j) {
        SplitDecision decision;
        decision.cluster_id = j;
        decision.pre = pre_scores[j];
        if (members[j].empty()) {
            decision.note = "empty cluster";
            result.next_centroids.push_back(clustering.centroids[j]);
            result.decisions.push_back(std::move(decision));
            continue;
        }
        if (result.new_k >= max_k) {
            decision.note = "k cap reached";
            result.next_centroids.push_back(clustering.centroids[j]);
            result.decisions.push_back(std::move(decision));
            continue;
        }
        const std::uint64_t split_seed =
            mix_seed(run_seed, detail::kStreamSplit, static_cast<std::uint64_t>(round), j);
        try {
            SplitEvaluation eval =
                post_bic(points, members[j], split_seed, kappa_fixed, config.bic);
            decision.post = eval.score;
            decision.sub_sizes = {eval.subs[0].n, eval.subs[1].n};
            decision.subs = std::move(eval.subs);
            decision.accepted = decision.pre.value < decision.post->value;
            if (decision.accepted) {
                ++result.new_k;
                result.next_centroids.push_back((*decision.subs)[0].params.mu);
                result.next_centroids.push_back((*decision.subs)[1].params.mu);
            } else {
                result.next_centroids.push_back(clustering.centroids[j]);
            }
        } catch (const TooSmallToSplit& e) {
            decision.note = e.what();
            result.next_centroids.push_back(clustering.centroids[j]);
        }
        result.decisions.push_back(std::move(decision));
    }
    return result;
}

// Full estimation: alternate improve-parameters and improve-structure
// until a round accepts no split (or a guard trips), then run one final
// partition at the estimated k and fit the reported components.
inline EstimationReport estimate(const PointSet& points, const SxConfig& config) {
    if (config.initial_k < 1) throw Error("estimate: initial_k must be at least 1");
    if (points.size() < config.initial_k) {
        throw TooFewPoints("estimate: N " + std::to_string(points.size()) + " < initial_k " +
                           std::to_string(config.initial_k));
    }
    if (config.kappa_mode == KappaMode::fixed && !(config.fixed_kappa > 0.0)) {
        throw Error("estimate: fixed mode requires a positive kappa");
    }
    const std::size_t max_k =
        config.max_k > 0 ? config.max_k : std::max(config.initial_k, points.size() / 2);

    EstimationReport report;
    report.seed = config.seed;
    report.mode = config.kappa_mode;
    report.fixed_kappa = config.kappa_mode == KappaMode::fixed ? config.fixed_kappa : 0.0;

    std::size_t k = config.initial_k;
    int round = 0;
    std::optional<std::vector<UnitVector>> warm;
    for (;;) {
        ++round;
        const std::uint64_t params_seed =
            mix_seed(config.seed, detail::kStreamParams, static_cast<std::uint64_t>(round));
        RoundFit fit = improve_parameters(points, k, params_seed, config, warm);
        for (auto& note : fit.notes) report.notes.push_back("round " + std::to_string(round) +
                                                            ": " + note);
        StructureResult structure = improve_structure(points, fit.clustering, fit.pre_scores,
                                                      config.seed, round, config, max_k);
        report.trace.push_back(std::move(structure.decisions));
        warm = std::move(structure.next_centroids);
        if (structure.new_k == k || round >= config.max_outer_iters) {
            k = structure.new_k;
            break;
        }
        k = structure.new_k;
    }
    report.rounds = round;
    report.k = k;

    SkMeansConfig final_config;
    final_config.k = k;
    final_config.max_iters = config.skm_max_iters;
    final_config.rel_tol = config.skm_rel_tol;
    final_config.seed =
        mix_seed(config.seed, detail::kStreamFinal, static_cast<std::uint64_t>(round));
    final_config.init_centroids = warm;  // continue from the converged state
    const Clustering final_run = run_skmeans(points, final_config);
    report.assignment = final_run.assignment;

    const auto members = detail::cluster_members(final_run.assignment, k);
    const auto kappa_fixed = detail::fixed_kappa_of(config);
    for (std::size_t j = 0; j < k; ++j) {
        if (members[j].empty()) {
            report.clusters.push_back(ClusterSummary{0, VmfParams{final_run.centroids[j], 0.0}});
            report.notes.push_back("final cluster " + std::to_string(j) + " is empty");
            continue;
        }
        auto [params, fell_back] =
            detail::fit_component_or_uniform(points, members[j], kappa_fixed);
        if (fell_back) {
            report.notes.push_back("final cluster " + std::to_string(j) +
                                   " resultant degenerate; reported as uniform");
        }
        report.clusters.push_back(
            ClusterSummary{static_cast<std::uint32_t>(members[j].size()), std::move(params)});
    }
    return report;
}

// The fixed-concentration variant: identical loop with every component
// fit carrying the supplied kappa and the reduced parameter counts.
inline EstimationReport fit_fixed(const PointSet& points, double kappa, SxConfig config) {
    if (!(kappa > 0.0)) throw Error("fit_fixed: kappa must be positive");
    config.kappa_mode = KappaMode::fixed;
    config.fixed_kappa = kappa;
    return estimate(points, config);
}

}  // namespace sxm
