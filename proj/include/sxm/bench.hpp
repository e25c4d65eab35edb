#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sxm/errors.hpp"
#include "sxm/random.hpp"
#include "sxm/sphere.hpp"
#include "sxm/sxmeans.hpp"
#include "sxm/vmf.hpp"
#include "sxm/xmeans.hpp"

namespace sxm {

struct Component {
    std::size_t n = 0;
    std::optional<std::vector<double>> mu;  // absent: drawn uniformly on the sphere
    double kappa = 0.0;
};

struct SyntheticSpec {
    std::size_t d = 3;
    std::vector<Component> components;
    std::uint64_t seed = 0;
};

struct LabeledPoints {
    PointSet points;
    std::vector<std::uint32_t> labels;
    std::vector<UnitVector> true_mus;
    std::vector<double> true_kappas;
};

// Draws the mixture described by the spec: unspecified centroids are
// sampled first (normalized Gaussians), then each component's points.
// Bitwise deterministic given the spec.
inline LabeledPoints generate(const SyntheticSpec& spec) {
    if (spec.components.empty()) throw Error("generate: no components");
    for (const auto& c : spec.components) {
        if (c.n < 1) throw Error("generate: every component needs n >= 1");
        if (!(c.kappa >= 0.0)) throw Error("generate: kappa must be non-negative");
    }
    RandomStream rng(spec.seed);
    std::vector<UnitVector> mus;
    mus.reserve(spec.components.size());
    for (const auto& c : spec.components) {
        if (c.mu) {
            if (c.mu->size() != spec.d) {
                throw DimensionMismatch("generate: component mean dimension mismatch");
            }
            mus.push_back(UnitVector::normalized(*c.mu));
        } else {
            mus.push_back(sample_uniform_direction(spec.d, rng));
        }
    }
    LabeledPoints out{PointSet(spec.d), {}, {}, {}};
    for (std::size_t i = 0; i < spec.components.size(); ++i) {
        const auto& c = spec.components[i];
        const PointSet draws = sample_vmf(VmfParams{mus[i], c.kappa}, c.n, rng);
        out.points.append(draws);
        out.labels.insert(out.labels.end(), c.n, static_cast<std::uint32_t>(i));
        out.true_mus.push_back(mus[i]);
        out.true_kappas.push_back(c.kappa);
    }
    return out;
}

// Three isotropic Gaussian blobs in a +-10 box, 500 points each at unit
// standard deviation; the synthetic "Blobs" dataset of the benchmark.
inline std::pair<Matrix, std::vector<std::uint32_t>> make_blobs(std::uint64_t seed,
                                                                std::size_t per_cluster = 500,
                                                                std::size_t k = 3,
                                                                std::size_t d = 3) {
    RandomStream rng(seed);
    std::vector<std::vector<double>> centers(k, std::vector<double>(d));
    for (auto& c : centers) {
        for (double& x : c) x = rng.uniform() * 20.0 - 10.0;
    }
    Matrix rows(d);
    std::vector<std::uint32_t> labels;
    std::vector<double> row(d);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < per_cluster; ++i) {
            for (std::size_t c = 0; c < d; ++c) row[c] = centers[j][c] + rng.normal();
            rows.add(row);
            labels.push_back(static_cast<std::uint32_t>(j));
        }
    }
    return {std::move(rows), std::move(labels)};
}

struct MethodSpec {
    enum class Kind { sx, fixed, xmeans };
    Kind kind = Kind::sx;
    double kappa = 0.0;  // fixed mode only
};

inline std::string format_method(const MethodSpec& method) {
    switch (method.kind) {
        case MethodSpec::Kind::sx:
            return "sx";
        case MethodSpec::Kind::fixed: {
            // Trim trailing zeros for readable file names and headers.
            char buffer[64];
            std::snprintf(buffer, sizeof buffer, "%g", method.kappa);
            return std::string("fixed(") + buffer + ")";
        }
        case MethodSpec::Kind::xmeans:
            return "xmeans";
    }
    return "?";
}

// Accepts "sx", "xmeans", "fixed10", "fixed:10", "fixed(10)".
inline MethodSpec parse_method(const std::string& text) {
    if (text == "sx") return {MethodSpec::Kind::sx, 0.0};
    if (text == "xmeans") return {MethodSpec::Kind::xmeans, 0.0};
    if (text.rfind("fixed", 0) == 0) {
        std::string rest = text.substr(5);
        if (!rest.empty() && (rest[0] == ':' || rest[0] == '(')) rest = rest.substr(1);
        if (!rest.empty() && rest.back() == ')') rest.pop_back();
        try {
            const double kappa = std::stod(rest);
            if (kappa > 0.0) return {MethodSpec::Kind::fixed, kappa};
        } catch (...) {
        }
        throw Error("parse_method: fixed method needs a positive kappa, got '" + text + "'");
    }
    throw Error("parse_method: unknown method '" + text + "'");
}

// Data a benchmark cell runs on. Synthetic sources are regenerated per
// run from a per-run seed; fixed sources reuse the same data and vary
// only the estimation seed.
struct BenchSource {
    std::optional<SyntheticSpec> synthetic;
    std::optional<PointSet> sphere_points;  // for sx / fixed on fixed data
    std::optional<Matrix> raw_rows;         // for xmeans on fixed data
};

inline BenchSource synthetic_source(std::size_t true_k, std::size_t points_per_cluster,
                                    double kappa, std::size_t d) {
    SyntheticSpec spec;
    spec.d = d;
    spec.components.assign(true_k, Component{points_per_cluster, std::nullopt, kappa});
    return BenchSource{spec, std::nullopt, std::nullopt};
}

struct RunSummary {
    std::uint64_t seed = 0;
    bool ok = false;
    std::size_t k = 0;
    int rounds = 0;
    std::size_t accepted_splits = 0;
    std::string error;
};

struct BenchResult {
    std::string method;
    std::size_t true_k = 0;
    std::size_t runs = 0;
    double mean_k = 0.0;
    double sd_k = 0.0;  // population standard deviation over successful runs
    std::vector<RunSummary> per_run;
};

namespace detail {

inline std::size_t count_accepted(const std::vector<std::vector<SplitDecision>>& trace) {
    std::size_t n = 0;
    for (const auto& round : trace) {
        for (const auto& d : round) n += d.accepted ? 1 : 0;
    }
    return n;
}

inline Matrix rows_of(const PointSet& points) {
    Matrix rows(points.dim());
    for (std::size_t i = 0; i < points.size(); ++i) rows.add(points[i]);
    return rows;
}

}  // namespace detail

// Executes `runs` independent estimations with seeds base_seed ..
// base_seed + runs - 1 and aggregates the estimated k. A failed run is
// recorded and excluded from the aggregate; the batch never aborts.
// max_k = 0 keeps the estimators' own N/2 growth guard.
inline BenchResult run_benchmark(const MethodSpec& method, const BenchSource& source,
                                 std::size_t true_k, std::size_t runs, std::uint64_t base_seed,
                                 std::size_t max_k = 0) {
    if (runs < 1) throw Error("run_benchmark: needs at least one run");
    BenchResult result;
    result.method = format_method(method);
    result.true_k = true_k;
    result.runs = runs;

    for (std::size_t r = 0; r < runs; ++r) {
        const std::uint64_t seed = base_seed + r;
        RunSummary summary;
        summary.seed = seed;
        try {
            std::optional<LabeledPoints> generated;
            const PointSet* sphere = nullptr;
            const Matrix* raw = nullptr;
            std::optional<Matrix> raw_local;
            if (source.synthetic) {
                SyntheticSpec spec = *source.synthetic;
                spec.seed = mix_seed(seed, detail::kStreamData);
                generated = generate(spec);
                sphere = &generated->points;
                if (method.kind == MethodSpec::Kind::xmeans) {
                    raw_local = detail::rows_of(generated->points);
                    raw = &*raw_local;
                }
            } else {
                if (source.sphere_points) sphere = &*source.sphere_points;
                if (source.raw_rows) raw = &*source.raw_rows;
            }

            if (method.kind == MethodSpec::Kind::xmeans) {
                if (!raw) throw Error("run_benchmark: xmeans needs raw rows");
                XMeansConfig config;
                config.seed = seed;
                config.max_k = max_k;
                const XMeansReport report = xmeans_baseline(*raw, config);
                summary.k = report.k;
                summary.rounds = report.rounds;
                summary.accepted_splits = detail::count_accepted(report.trace);
            } else {
                if (!sphere) throw Error("run_benchmark: spherical methods need unit points");
                SxConfig config;
                config.seed = seed;
                config.max_k = max_k;
                const EstimationReport report =
                    method.kind == MethodSpec::Kind::fixed
                        ? fit_fixed(*sphere, method.kappa, config)
                        : estimate(*sphere, config);
                summary.k = report.k;
                summary.rounds = report.rounds;
                summary.accepted_splits = detail::count_accepted(report.trace);
            }
            summary.ok = true;
        } catch (const Error& e) {
            summary.ok = false;
            summary.error = e.what();
        }
        result.per_run.push_back(std::move(summary));
    }

    double sum = 0.0, sum_sq = 0.0;
    std::size_t ok_count = 0;
    for (const auto& run : result.per_run) {
        if (!run.ok) continue;
        const double k = static_cast<double>(run.k);
        sum += k;
        sum_sq += k * k;
        ++ok_count;
    }
    if (ok_count > 0) {
        result.mean_k = sum / static_cast<double>(ok_count);
        const double variance =
            std::max(0.0, sum_sq / static_cast<double>(ok_count) - result.mean_k * result.mean_k);
        result.sd_k = std::sqrt(variance);
    }
    return result;
}

struct MatchEntry {
    std::uint32_t estimated = 0;
    std::uint32_t truth = 0;
    int size_delta = 0;       // estimated size - true size
    double angular_error = 0; // radians between matched directions
};

struct Evaluation {
    int k_error = 0;  // estimated k - true component count
    std::vector<MatchEntry> matches;
    std::vector<std::uint32_t> unmatched_estimated;
    std::vector<std::uint32_t> unmatched_true;
};

// Greedy matching of estimated clusters to true components by maximum
// centroid cosine. True directions default to the per-label mean
// directions of the labeled points.
inline Evaluation evaluate_against_labels(const EstimationReport& report, const PointSet& points,
                                          std::span<const std::uint32_t> labels,
                                          std::optional<std::vector<UnitVector>> true_mus =
                                              std::nullopt) {
    if (labels.size() != points.size()) {
        throw Error("evaluate_against_labels: labels must cover all points");
    }
    std::uint32_t true_k = 0;
    for (std::uint32_t l : labels) true_k = std::max(true_k, l + 1);
    std::vector<std::vector<std::uint32_t>> groups(true_k);
    for (std::uint32_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);

    std::vector<UnitVector> reference;
    if (true_mus) {
        if (true_mus->size() != true_k) {
            throw Error("evaluate_against_labels: true_mus size != label count");
        }
        reference = *true_mus;
    } else {
        for (std::uint32_t t = 0; t < true_k; ++t) {
            if (groups[t].empty()) throw Error("evaluate_against_labels: label gap at " +
                                               std::to_string(t));
            reference.push_back(estimate_mu(points, groups[t]));
        }
    }

    struct Pair {
        double cosine;
        std::uint32_t est, truth;
    };
    std::vector<Pair> pairs;
    for (std::uint32_t e = 0; e < report.clusters.size(); ++e) {
        for (std::uint32_t t = 0; t < true_k; ++t) {
            pairs.push_back(
                {cosine_similarity(report.clusters[e].params.mu, reference[t]), e, t});
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const Pair& a, const Pair& b) { return a.cosine > b.cosine; });

    Evaluation eval;
    eval.k_error = static_cast<int>(report.clusters.size()) - static_cast<int>(true_k);
    std::vector<bool> est_used(report.clusters.size(), false);
    std::vector<bool> true_used(true_k, false);
    for (const Pair& p : pairs) {
        if (est_used[p.est] || true_used[p.truth]) continue;
        est_used[p.est] = true;
        true_used[p.truth] = true;
        MatchEntry entry;
        entry.estimated = p.est;
        entry.truth = p.truth;
        entry.size_delta = static_cast<int>(report.clusters[p.est].size) -
                           static_cast<int>(groups[p.truth].size());
        entry.angular_error = std::acos(std::clamp(p.cosine, -1.0, 1.0));
        eval.matches.push_back(entry);
    }
    for (std::uint32_t e = 0; e < est_used.size(); ++e) {
        if (!est_used[e]) eval.unmatched_estimated.push_back(e);
    }
    for (std::uint32_t t = 0; t < true_used.size(); ++t) {
        if (!true_used[t]) eval.unmatched_true.push_back(t);
    }
    return eval;
}

}  // namespace sxm
