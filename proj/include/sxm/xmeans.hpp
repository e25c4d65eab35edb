#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sxm/errors.hpp"
#include "sxm/model_selection.hpp"
#include "sxm/random.hpp"

namespace sxm {

// Row-major matrix of raw (not necessarily normalized) vectors; the
// Euclidean side of the benchmark works on these.
struct Matrix {
    std::size_t dim = 0;
    std::vector<double> data;

    explicit Matrix(std::size_t d) : dim(d) {
        if (d < 1) throw Error("Matrix: dimension must be at least 1");
    }

    std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }

    std::span<const double> operator[](std::size_t i) const { return {data.data() + i * dim, dim}; }

    void add(std::span<const double> row) {
        if (row.size() != dim) throw DimensionMismatch("Matrix::add: row dimension mismatch");
        data.insert(data.end(), row.begin(), row.end());
    }
};

struct XMeansConfig {
    std::size_t initial_k = 2;
    int max_outer_iters = 50;
    std::size_t max_k = 0;  // 0 resolves to N / 2
    std::uint64_t seed = 0;
    int max_iters = 300;
    double rel_tol = 1e-6;
};

struct GaussCluster {
    std::uint32_t size = 0;
    std::vector<double> centroid;
    double variance = 0.0;  // per-axis spherical variance MLE
};

struct XMeansReport {
    std::size_t k = 0;
    std::vector<GaussCluster> clusters;
    std::vector<std::uint32_t> assignment;
    std::vector<std::vector<SplitDecision>> trace;
    int rounds = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> notes;
};

namespace euclid {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

// k distinct rows drawn uniformly without replacement (Forgy seeding,
// the classic X-means-era initialization).
inline std::vector<std::vector<double>> forgy_init(const Matrix& rows, std::size_t k,
                                                   RandomStream& rng) {
    const std::size_t n = rows.size();
    if (k > n) throw TooFewPoints("forgy_init: k exceeds N");
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t pick = j + rng.uniform_index(n - j);
        std::swap(idx[j], idx[pick]);
        const auto row = rows[idx[j]];
        centroids.emplace_back(row.begin(), row.end());
    }
    return centroids;
}

inline std::vector<std::uint32_t> assign(const Matrix& rows,
                                         const std::vector<std::vector<double>>& centroids) {
    std::vector<std::uint32_t> a(rows.size(), 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto row = rows[i];
        double best = squared_distance(row, centroids[0]);
        std::uint32_t best_j = 0;
        for (std::uint32_t j = 1; j < centroids.size(); ++j) {
            const double v = squared_distance(row, centroids[j]);
            if (v < best) {
                best = v;
                best_j = j;
            }
        }
        a[i] = best_j;
    }
    return a;
}

inline std::vector<std::vector<double>> update(const Matrix& rows,
                                               const std::vector<std::uint32_t>& assignment,
                                               std::size_t k,
                                               const std::vector<std::vector<double>>& previous) {
    const std::size_t d = rows.dim;
    std::vector<std::vector<double>> centroids(k, std::vector<double>(d, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto row = rows[i];
        auto& c = centroids[assignment[i]];
        for (std::size_t j = 0; j < d; ++j) c[j] += row[j];
        ++counts[assignment[i]];
    }
    std::vector<std::size_t> empties;
    for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] == 0) {
            empties.push_back(j);
            centroids[j] = previous[j];
            continue;
        }
        for (double& x : centroids[j]) x /= static_cast<double>(counts[j]);
    }
    if (!empties.empty()) {
        // Reseed each empty cluster with a point fitting its own
        // centroid worst (largest distance), farthest first.
        std::vector<std::uint32_t> order(rows.size());
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> misfit(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            misfit[i] = squared_distance(rows[i], centroids[assignment[i]]);
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return misfit[a] > misfit[b]; });
        std::size_t next = 0;
        for (std::size_t j : empties) {
            const auto row = rows[order[next]];
            centroids[j].assign(row.begin(), row.end());
            ++next;
        }
    }
    return centroids;
}

inline double sse(const Matrix& rows, const std::vector<std::uint32_t>& assignment,
                  const std::vector<std::vector<double>>& centroids) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        s += squared_distance(rows[i], centroids[assignment[i]]);
    }
    return s;
}

struct Lloyd {
    std::size_t k = 0;
    std::vector<std::uint32_t> assignment;
    std::vector<std::vector<double>> centroids;
    double sse = 0.0;
    int iterations = 0;
};

inline Lloyd run(const Matrix& rows, std::size_t k, std::uint64_t seed, int max_iters,
                 double rel_tol) {
    if (k < 1) throw Error("euclid::run: k must be at least 1");
    if (rows.size() < k) throw TooFewPoints("euclid::run: N < k");
    RandomStream rng(seed);
    std::vector<std::vector<double>> centroids = forgy_init(rows, k, rng);
    Lloyd result;
    result.k = k;
    std::vector<std::uint32_t> current = assign(rows, centroids);
    double prev_sse = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iters; ++it) {
        centroids = update(rows, current, k, centroids);
        std::vector<std::uint32_t> next = assign(rows, centroids);
        const double value = sse(rows, next, centroids);
        result.iterations = it;
        if (next == current) break;
        const bool plateau =
            it > 1 && std::abs(value - prev_sse) <= rel_tol * std::max(1.0, std::abs(value));
        current = std::move(next);
        prev_sse = value;
        if (plateau) break;
    }
    result.assignment = std::move(current);
    result.centroids = update(rows, result.assignment, k, centroids);
    result.sse = sse(rows, result.assignment, result.centroids);
    return result;
}

// Max log-likelihood of one spherical Gaussian over the subset, with
// the per-axis variance at its MLE (floored to stay finite when all
// points coincide).
inline double gauss_log_likelihood(const Matrix& rows, std::span<const std::uint32_t> subset,
                                   std::span<const double> centroid) {
    const double n = static_cast<double>(subset.size());
    const double d = static_cast<double>(rows.dim);
    double total = 0.0;
    for (std::uint32_t id : subset) total += squared_distance(rows[id], centroid);
    const double variance = std::max(total / (n * d), 1e-12);
    return -0.5 * n * d * (std::log(2.0 * M_PI * variance) + 1.0);
}

inline double cluster_variance(const Matrix& rows, std::span<const std::uint32_t> subset,
                               std::span<const double> centroid) {
    double total = 0.0;
    for (std::uint32_t id : subset) total += squared_distance(rows[id], centroid);
    return std::max(total / (static_cast<double>(subset.size()) * static_cast<double>(rows.dim)),
                    1e-12);
}

inline std::vector<double> mean_of(const Matrix& rows, std::span<const std::uint32_t> subset) {
    std::vector<double> m(rows.dim, 0.0);
    for (std::uint32_t id : subset) {
        const auto row = rows[id];
        for (std::size_t j = 0; j < rows.dim; ++j) m[j] += row[j];
    }
    for (double& x : m) x /= static_cast<double>(subset.size());
    return m;
}

inline BicScore pre_bic(const Matrix& rows, std::span<const std::uint32_t> subset) {
    if (subset.empty()) throw EmptySelection("euclid::pre_bic: empty selection");
    const std::vector<double> centroid = mean_of(rows, subset);
    const double ll = gauss_log_likelihood(rows, subset, centroid);
    return make_bic(ll, rows.dim + 1, subset.size());
}

struct GaussSplitEvaluation {
    BicScore score;
    std::array<std::uint32_t, 2> sizes{0, 0};
};

inline GaussSplitEvaluation post_bic(const Matrix& rows, std::span<const std::uint32_t> subset,
                                     std::uint64_t seed, int max_iters, double rel_tol) {
    if (subset.size() < 4) {
        throw TooSmallToSplit("euclid::post_bic: cluster of " + std::to_string(subset.size()) +
                              " points is below the minimum split size 4");
    }
    Matrix local(rows.dim);
    for (std::uint32_t id : subset) local.add(rows[id]);
    const Lloyd split = run(local, 2, seed, max_iters, rel_tol);
    std::vector<std::uint32_t> side1, side2;
    for (std::uint32_t i = 0; i < local.size(); ++i) {
        (split.assignment[i] == 0 ? side1 : side2).push_back(i);
    }
    if (side1.size() < 2 || side2.size() < 2) {
        throw TooSmallToSplit("euclid::post_bic: a subcluster has fewer than 2 points");
    }
    const double total = static_cast<double>(subset.size());
    double ll = 0.0;
    for (const auto* side : {&side1, &side2}) {
        const double m = static_cast<double>(side->size());
        const std::vector<double> centroid = mean_of(local, *side);
        ll += m * (std::log(m) - std::log(total)) + gauss_log_likelihood(local, *side, centroid);
    }
    const BicScore score = make_bic(ll, 2 * (rows.dim + 1) + 1, subset.size());
    return GaussSplitEvaluation{score,
                                {static_cast<std::uint32_t>(side1.size()),
                                 static_cast<std::uint32_t>(side2.size())}};
}

}  // namespace euclid

// Gaussian X-means baseline: the same improve-parameters /
// improve-structure loop as the spherical estimator, with a Euclidean
// k-means engine and the Pelleg-Moore spherical-Gaussian BIC.
inline XMeansReport xmeans_baseline(const Matrix& rows, const XMeansConfig& config) {
    if (config.initial_k < 1) throw Error("xmeans_baseline: initial_k must be at least 1");
    if (rows.size() < std::max<std::size_t>(2, config.initial_k)) {
        throw TooFewPoints("xmeans_baseline: N " + std::to_string(rows.size()) +
                           " < " + std::to_string(std::max<std::size_t>(2, config.initial_k)));
    }
    const std::size_t max_k =
        config.max_k > 0 ? config.max_k : std::max(config.initial_k, rows.size() / 2);

    XMeansReport report;
    report.seed = config.seed;

    std::size_t k = config.initial_k;
    int round = 0;
    euclid::Lloyd fit;
    for (;;) {
        ++round;
        const std::uint64_t params_seed =
            mix_seed(config.seed, detail::kStreamParams, static_cast<std::uint64_t>(round));
        fit = euclid::run(rows, k, params_seed, config.max_iters, config.rel_tol);
        std::vector<std::vector<std::uint32_t>> members(k);
        for (std::uint32_t i = 0; i < fit.assignment.size(); ++i) {
            members[fit.assignment[i]].push_back(i);
        }
        std::size_t new_k = k;
        std::vector<SplitDecision> decisions;
        for (std::uint32_t j = 0; j < k; ++j) {
            SplitDecision decision;
            decision.cluster_id = j;
            if (members[j].empty()) {
                decision.pre = make_bic(0.0, rows.dim + 1, 1);
                decision.note = "empty cluster";
                decisions.push_back(std::move(decision));
                continue;
            }
            decision.pre = euclid::pre_bic(rows, members[j]);
            if (new_k >= max_k) {
                decision.note = "k cap reached";
                decisions.push_back(std::move(decision));
                continue;
            }
            const std::uint64_t split_seed =
                mix_seed(config.seed, detail::kStreamSplit, static_cast<std::uint64_t>(round), j);
            try {
                const euclid::GaussSplitEvaluation eval =
                    euclid::post_bic(rows, members[j], split_seed, config.max_iters,
                                     config.rel_tol);
                decision.post = eval.score;
                decision.sub_sizes = eval.sizes;
                decision.accepted = decision.pre.value < decision.post->value;
                if (decision.accepted) ++new_k;
            } catch (const TooSmallToSplit& e) {
                decision.note = e.what();
            }
            decisions.push_back(std::move(decision));
        }
        report.trace.push_back(std::move(decisions));
        if (new_k == k || round >= config.max_outer_iters) {
            k = new_k;
            break;
        }
        k = new_k;
    }
    report.rounds = round;
    report.k = k;

    const std::uint64_t final_seed =
        mix_seed(config.seed, detail::kStreamFinal, static_cast<std::uint64_t>(round));
    const euclid::Lloyd final_run =
        euclid::run(rows, k, final_seed, config.max_iters, config.rel_tol);
    report.assignment = final_run.assignment;
    std::vector<std::vector<std::uint32_t>> members(k);
    for (std::uint32_t i = 0; i < final_run.assignment.size(); ++i) {
        members[final_run.assignment[i]].push_back(i);
    }
    for (std::size_t j = 0; j < k; ++j) {
        GaussCluster cluster;
        cluster.size = static_cast<std::uint32_t>(members[j].size());
        cluster.centroid = final_run.centroids[j];
        cluster.variance =
            members[j].empty() ? 0.0
                               : euclid::cluster_variance(rows, members[j], final_run.centroids[j]);
        if (members[j].empty()) {
            report.notes.push_back("final cluster " + std::to_string(j) + " is empty");
        }
        report.clusters.push_back(std::move(cluster));
    }
    return report;
}

}  // namespace sxm
