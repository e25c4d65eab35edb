#include <doctest.h>

#include <cmath>
#include <vector>

#include "sxm/model_selection.hpp"
#include "sxm/random.hpp"
#include "sxm/sphere.hpp"
#include "sxm/vmf.hpp"

using namespace sxm;

namespace {

PointSet blob(std::uint64_t seed, const UnitVector& mu, double kappa, std::size_t n) {
    RandomStream rng(seed);
    return sample_vmf(VmfParams{mu, kappa}, n, rng);
}

PointSet antipodal_pair_blobs(std::uint64_t seed, std::size_t per_side = 250) {
    RandomStream rng(seed);
    PointSet points(3);
    points.append(sample_vmf(VmfParams{UnitVector::from_unit({0.0, 0.0, 1.0}), 100.0}, per_side,
                             rng));
    points.append(sample_vmf(VmfParams{UnitVector::from_unit({0.0, 0.0, -1.0}), 100.0}, per_side,
                             rng));
    return points;
}

}  // namespace

TEST_CASE("parameter counts") {
    CHECK(param_count_single(3, false) == 3);
    CHECK(param_count_single(3, true) == 2);
    CHECK(param_count_single(2, false) == 2);
    CHECK(param_count_split(3, false) == 7);
    CHECK(param_count_split(3, true) == 5);
    CHECK(param_count_split(2, false) == 5);
    BicOptions no_weight;
    no_weight.count_mixing_weight = false;
    CHECK(param_count_split(3, false, no_weight) == 6);
}

TEST_CASE("BIC score identity") {
    const BicScore s = make_bic(-120.5, 7, 340);
    CHECK(s.value ==
          doctest::Approx(s.log_likelihood - 0.5 * 7.0 * std::log(340.0)).epsilon(1e-14));
    // A single point carries no penalty: log 1 = 0.
    const BicScore single = make_bic(-3.25, 3, 1);
    CHECK(single.value == single.log_likelihood);
    CHECK_THROWS_AS(make_bic(0.0, 1, 0), Error);
}

TEST_CASE("single-component likelihood closed forms") {
    PointSet points(3);
    const UnitVector mu = UnitVector::from_unit({0.0, 0.0, 1.0});
    points.add(mu);
    const std::vector<std::uint32_t> one{0};
    const VmfParams params{mu, 2.0};
    CHECK(log_likelihood_single(points, one, params) ==
          doctest::Approx(std::log(2.0) - kLogTwoPi).epsilon(1e-12));
    CHECK(log_likelihood_single(points, one, params) ==
          doctest::Approx(-1.1447298858494).epsilon(1e-10));

    CHECK_THROWS_AS(log_likelihood_single(points, std::vector<std::uint32_t>{}, params),
                    EmptySelection);

    // kappa = 0 falls back to the uniform density.
    const VmfParams uniform{mu, 0.0};
    CHECK(log_likelihood_single(points, one, uniform) ==
          doctest::Approx(log_uniform_density(3)).epsilon(1e-12));
}

TEST_CASE("doubling the subset doubles the likelihood") {
    const UnitVector mu = UnitVector::from_unit({0.0, 1.0, 0.0});
    PointSet points = blob(3, mu, 35.0, 80);
    PointSet doubled(3);
    doubled.append(points);
    doubled.append(points);
    std::vector<std::uint32_t> ids = all_ids(points);
    std::vector<std::uint32_t> ids2 = all_ids(doubled);
    const VmfParams params{mu, 35.0};
    CHECK(log_likelihood_single(doubled, ids2, params) ==
          doctest::Approx(2.0 * log_likelihood_single(points, ids, params)).epsilon(1e-12));
}

TEST_CASE("approximated likelihood tracks the exact one at d = 3") {
    const UnitVector mu = UnitVector::from_unit({0.0, 0.0, 1.0});
    for (double kappa : {10.0, 50.0, 100.0, 200.0}) {
        PointSet points = blob(17 + static_cast<std::uint64_t>(kappa), mu, kappa, 100);
        std::vector<std::uint32_t> ids = all_ids(points);
        const VmfParams params{mu, kappa};
        const double approx = log_likelihood_single(points, ids, params);
        double exact = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            exact += log_density(points.point(i), params, NormMode::exact);
        }
        CHECK(std::abs(approx - exact) <= 0.01 * static_cast<double>(points.size()));
    }
}

TEST_CASE("split likelihood equals the per-side decomposition") {
    PointSet points = antipodal_pair_blobs(23);
    std::vector<std::uint32_t> side1, side2;
    for (std::uint32_t i = 0; i < 250; ++i) side1.push_back(i);
    for (std::uint32_t i = 250; i < 500; ++i) side2.push_back(i);
    const MlFit fit1 = fit_vmf(points, side1);
    const MlFit fit2 = fit_vmf(points, side2);

    const double split = log_likelihood_split(points, side1, fit1.params, side2, fit2.params);
    const double decomposed =
        log_likelihood_single(points, side1, fit1.params) +
        log_likelihood_single(points, side2, fit2.params) +
        250.0 * (std::log(250.0) - std::log(500.0)) + 250.0 * (std::log(250.0) - std::log(500.0));
    CHECK(split == doctest::Approx(decomposed).epsilon(1e-12));
    CHECK(std::abs(split - decomposed) <= 1e-9);
}

TEST_CASE("equal halves with identical parameters cost exactly N log 2") {
    const UnitVector mu = UnitVector::from_unit({1.0, 0.0, 0.0});
    PointSet points = blob(31, mu, 60.0, 200);
    std::vector<std::uint32_t> all = all_ids(points);
    std::vector<std::uint32_t> half1(all.begin(), all.begin() + 100);
    std::vector<std::uint32_t> half2(all.begin() + 100, all.end());
    const VmfParams params{mu, 60.0};
    const double split = log_likelihood_split(points, half1, params, half2, params);
    const double single = log_likelihood_single(points, all, params);
    CHECK(split == doctest::Approx(single + 200.0 * std::log(0.5)).epsilon(1e-12));

    CHECK_THROWS_AS(log_likelihood_split(points, all, params, std::vector<std::uint32_t>{},
                                         params),
                    EmptySubcluster);
}

TEST_CASE("pre-BIC structure") {
    PointSet points = blob(41, UnitVector::from_unit({0.0, 0.0, 1.0}), 100.0, 50);
    std::vector<std::uint32_t> ids = all_ids(points);

    const BicScore free_score = pre_bic(points, ids, std::nullopt);
    CHECK(free_score.n == 50);
    CHECK(free_score.param_count == 3);
    CHECK(free_score.value ==
          doctest::Approx(free_score.log_likelihood - 1.5 * std::log(50.0)).epsilon(1e-12));

    const BicScore fixed_score = pre_bic(points, ids, 10.0);
    CHECK(fixed_score.param_count == 2);
    // Same direction, different concentration: only the kappa value and
    // the parameter count may differ.
    CHECK(fixed_score.n == free_score.n);

    PointSet one(3);
    one.add(UnitVector::from_unit({1.0, 0.0, 0.0}));
    const BicScore single = pre_bic(one, all_ids(one), std::nullopt);
    CHECK(single.value == single.log_likelihood);
}

TEST_CASE("post-BIC accepts a genuine two-component cluster") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        PointSet points = antipodal_pair_blobs(seed + 50);
        std::vector<std::uint32_t> ids = all_ids(points);
        const BicScore pre = pre_bic(points, ids, std::nullopt);
        const SplitEvaluation post = post_bic(points, ids, seed, std::nullopt);
        CHECK(post.score.value > pre.value);
        CHECK(post.subs[0].n + post.subs[1].n == 500);
    }
}

TEST_CASE("post-BIC rejects splitting one concentrated component") {
    int rejected = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        PointSet points = blob(seed + 70, UnitVector::from_unit({0.0, 0.0, 1.0}), 100.0, 500);
        std::vector<std::uint32_t> ids = all_ids(points);
        const BicScore pre = pre_bic(points, ids, std::nullopt);
        const SplitEvaluation post = post_bic(points, ids, seed, std::nullopt);
        if (pre.value > post.score.value) ++rejected;
    }
    CHECK(rejected >= 18);
}

TEST_CASE("clusters below the minimum size cannot be split") {
    PointSet points(3);
    points.add(UnitVector::from_unit({1.0, 0.0, 0.0}));
    points.add(UnitVector::from_unit({0.0, 1.0, 0.0}));
    points.add(UnitVector::from_unit({0.0, 0.0, 1.0}));
    CHECK_THROWS_AS(post_bic(points, all_ids(points), 0, std::nullopt), TooSmallToSplit);
}

TEST_CASE("duplicating a separated fixture never flips an accept to a reject") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        PointSet points = antipodal_pair_blobs(seed + 90, 150);
        PointSet doubled(3);
        doubled.append(points);
        doubled.append(points);

        const BicScore pre_small = pre_bic(points, all_ids(points), std::nullopt);
        const SplitEvaluation post_small = post_bic(points, all_ids(points), seed, std::nullopt);
        const bool accept_small = post_small.score.value > pre_small.value;
        REQUIRE(accept_small);

        const BicScore pre_big = pre_bic(doubled, all_ids(doubled), std::nullopt);
        const SplitEvaluation post_big = post_bic(doubled, all_ids(doubled), seed, std::nullopt);
        CHECK(post_big.score.value > pre_big.value);
    }
}
