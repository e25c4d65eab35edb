#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sxm/errors.hpp"
#include "sxm/random.hpp"
#include "sxm/sphere.hpp"
#include "sxm/vmf.hpp"

namespace sxm {

struct SkMeansConfig {
    std::size_t k = 1;
    int max_iters = 300;
    double rel_tol = 1e-6;
    std::uint64_t seed = 0;
    // When set, used verbatim instead of k-means++ seeding.
    std::optional<std::vector<UnitVector>> init_centroids;
};

struct Clustering {
    std::size_t k = 0;
    std::vector<std::uint32_t> assignment;   // per-point cluster index in [0, k)
    std::vector<UnitVector> centroids;       // normalized resultants at convergence
    double objective = 0.0;                  // sum of centroid-point cosines
    int iterations = 0;
    std::vector<double> objective_history;   // objective after each iteration
};

// k-means++-style seeding with (1 - cosine) as the distance weight.
// Returns k distinct data points; deterministic given the stream state.
inline std::vector<UnitVector> init_centroids(const PointSet& points, std::size_t k,
                                              RandomStream& rng) {
    const std::size_t n = points.size();
    if (k > n) {
        throw TooFewPoints("init_centroids: k " + std::to_string(k) + " exceeds N " +
                           std::to_string(n));
    }
    if (k < 1) throw Error("init_centroids: k must be at least 1");

    std::vector<UnitVector> centroids;
    centroids.reserve(k);
    std::vector<bool> chosen(n, false);

    const std::size_t first = rng.uniform_index(n);
    chosen[first] = true;
    centroids.push_back(points.point(first));

    std::vector<double> min_weight(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        min_weight[i] = 1.0 - std::clamp(dot(points[i], centroids[0].coords()), -1.0, 1.0);
    }

    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (chosen[i]) min_weight[i] = 0.0;
            total += min_weight[i];
        }
        std::size_t pick = n;
        if (total > kZeroNormFloor) {
            const double r = rng.uniform() * total;
            double cum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cum += min_weight[i];
                if (r < cum && !chosen[i]) {
                    pick = i;
                    break;
                }
            }
        }
        if (pick == n) {
            // All remaining weight is zero (duplicated points); take the
            // lowest unchosen index.
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            }
        }
        chosen[pick] = true;
        centroids.push_back(points.point(pick));
        for (std::size_t i = 0; i < n; ++i) {
            const double w = 1.0 - std::clamp(dot(points[i], centroids.back().coords()), -1.0, 1.0);
            min_weight[i] = std::min(min_weight[i], w);
        }
    }
    return centroids;
}

// Nearest-centroid assignment by cosine; ties go to the lowest index.
inline std::vector<std::uint32_t> assign(const PointSet& points,
                                         const std::vector<UnitVector>& centroids) {
    if (centroids.empty()) throw Error("assign: no centroids");
    for (const auto& c : centroids) {
        if (c.dim() != points.dim()) {
            throw DimensionMismatch("assign: centroid dimension " + std::to_string(c.dim()) +
                                    " != " + std::to_string(points.dim()));
        }
    }
    std::vector<std::uint32_t> a(points.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto row = points[i];
        double best = dot(row, centroids[0].coords());
        std::uint32_t best_j = 0;
        for (std::uint32_t j = 1; j < centroids.size(); ++j) {
            const double v = dot(row, centroids[j].coords());
            if (v > best) {
                best = v;
                best_j = j;
            }
        }
        a[i] = best_j;
    }
    return a;
}

// Per-cluster normalized resultant. An empty cluster is reseeded with
// the point fitting its own centroid worst; a cluster whose resultant
// cancels to zero keeps its previous centroid.
inline std::vector<UnitVector> update_centroids(const PointSet& points,
                                                const std::vector<std::uint32_t>& assignment,
                                                std::size_t k,
                                                const std::vector<UnitVector>& previous) {
    const std::size_t d = points.dim();
    std::vector<double> sums(k * d, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::uint32_t j = assignment[i];
        const auto row = points[i];
        for (std::size_t c = 0; c < d; ++c) sums[j * d + c] += row[c];
        ++counts[j];
    }

    std::vector<UnitVector> centroids;
    centroids.reserve(k);
    std::vector<std::size_t> empties;
    for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] == 0) {
            empties.push_back(j);
            centroids.push_back(previous[j]);  // placeholder, replaced below
            continue;
        }
        const std::span<const double> sum(sums.data() + j * d, d);
        if (norm(sum) <= 1e-12) {
            centroids.push_back(previous[j]);
        } else {
            centroids.push_back(UnitVector::normalized(sum));
        }
    }

    if (!empties.empty()) {
        std::vector<std::uint32_t> order(points.size());
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> fit(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            fit[i] = dot(points[i], centroids[assignment[i]].coords());
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return fit[a] < fit[b]; });
        std::size_t next = 0;
        for (std::size_t j : empties) {
            centroids[j] = points.point(order[next]);
            ++next;
        }
    }
    return centroids;
}

inline double clustering_objective(const PointSet& points,
                                   const std::vector<std::uint32_t>& assignment,
                                   const std::vector<UnitVector>& centroids) {
    double j = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        j += dot(points[i], centroids[assignment[i]].coords());
    }
    return j;
}

// Alternates assignment and centroid updates until the assignment is
// stable, the relative objective change drops below rel_tol, or
// max_iters is hit. Deterministic given the seed.
inline Clustering run_skmeans(const PointSet& points, const SkMeansConfig& config) {
    if (config.k < 1) throw Error("run_skmeans: k must be at least 1");
    if (points.size() < config.k) {
        throw TooFewPoints("run_skmeans: N " + std::to_string(points.size()) + " < k " +
                           std::to_string(config.k));
    }
    if (config.max_iters < 1 || !(config.rel_tol > 0.0)) {
        throw Error("run_skmeans: max_iters must be >= 1 and rel_tol positive");
    }

    std::vector<UnitVector> centroids;
    if (config.init_centroids) {
        if (config.init_centroids->size() != config.k) {
            throw Error("run_skmeans: given centroids count != k");
        }
        centroids = *config.init_centroids;
    } else {
        RandomStream rng(config.seed);
        centroids = init_centroids(points, config.k, rng);
    }

    Clustering result;
    result.k = config.k;
    std::vector<std::uint32_t> current = assign(points, centroids);
    double prev_objective = -std::numeric_limits<double>::infinity();
    for (int it = 1; it <= config.max_iters; ++it) {
        centroids = update_centroids(points, current, config.k, centroids);
        std::vector<std::uint32_t> next = assign(points, centroids);
        const double objective = clustering_objective(points, next, centroids);
        result.iterations = it;
        result.objective_history.push_back(objective);
        if (next == current) {
            // Centroids were computed from this very assignment; the
            // converged state is internally consistent.
            break;
        }
        const bool plateau =
            it > 1 && std::abs(objective - prev_objective) <= config.rel_tol * std::max(1.0, std::abs(objective));
        current = std::move(next);
        prev_objective = objective;
        if (plateau) break;
    }
    result.assignment = std::move(current);
    result.centroids = update_centroids(points, result.assignment, config.k, centroids);
    result.objective = clustering_objective(points, result.assignment, result.centroids);
    return result;
}

}  // namespace sxm
