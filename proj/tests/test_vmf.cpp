#include <doctest.h>

#include <cmath>
#include <vector>

#include "sxm/random.hpp"
#include "sxm/sphere.hpp"
#include "sxm/vmf.hpp"

using namespace sxm;

namespace {

// Closed form for half-integer order: I_{1/2}(k) = sqrt(2/(pi k)) sinh k,
// evaluated in log space. Independent of the series implementation.
double log_bessel_half_oracle(double kappa) {
    return 0.5 * std::log(2.0 / (M_PI * kappa)) + kappa - std::log(2.0) +
           std::log1p(-std::exp(-2.0 * kappa));
}

// Closed form C_3(k) = k / (4 pi sinh k) in log space.
double log_c3_oracle(double kappa) {
    return std::log(kappa) - std::log(4.0 * M_PI) -
           (kappa - std::log(2.0) + std::log1p(-std::exp(-2.0 * kappa)));
}

double angle_between(const UnitVector& a, const UnitVector& b) {
    return std::acos(cosine_similarity(a, b));
}

}  // namespace

TEST_CASE("log-space Bessel series matches the half-order closed form") {
    CHECK(log_bessel_i_exact(0.5, 2.0) ==
          doctest::Approx(log_bessel_half_oracle(2.0)).epsilon(1e-10));
    CHECK(log_bessel_i_exact(0.5, 2.0) == doctest::Approx(0.7160024296894679).epsilon(1e-10));
    CHECK(log_bessel_i_exact(0.5, 100.0) ==
          doctest::Approx(log_bessel_half_oracle(100.0)).epsilon(1e-10));
    CHECK(log_bessel_i_exact(0.5, 100.0) == doctest::Approx(96.77847637380128).epsilon(1e-10));
}

TEST_CASE("log I_0 tends to zero as kappa vanishes") {
    CHECK(std::abs(log_bessel_i_exact(0.0, 1e-12)) < 1e-10);
}

TEST_CASE("Bessel series signals non-convergence out of range") {
    CHECK_THROWS_AS(log_bessel_i_exact(0.5, 1e5), NonConvergence);
}

TEST_CASE("normalizing constant in both modes") {
    CHECK(log_norm_const(3, 2.0, NormMode::exact) ==
          doctest::Approx(log_c3_oracle(2.0)).epsilon(1e-10));
    CHECK(log_norm_const(3, 2.0, NormMode::exact) ==
          doctest::Approx(-3.126244439023514).epsilon(1e-10));
    CHECK(log_norm_const(3, 100.0, NormMode::approx) ==
          doctest::Approx(-97.23270688042125).epsilon(1e-10));
    CHECK(std::abs(log_norm_const(3, 100.0, NormMode::exact) -
                   log_norm_const(3, 100.0, NormMode::approx)) < 0.01);
    // d = 2 exact route against the direct I_0 series.
    CHECK(log_norm_const(2, 5.0, NormMode::exact) ==
          doctest::Approx(-kLogTwoPi - log_bessel_i_exact(0.0, 5.0)).epsilon(1e-12));
}

TEST_CASE("log density examples") {
    const UnitVector mu = UnitVector::from_unit({0.0, 0.0, 1.0});
    const VmfParams params{mu, 2.0};
    CHECK(log_density(mu, params, NormMode::exact) ==
          doctest::Approx(-1.1262444390235142).epsilon(1e-10));

    // kappa = 0 is the uniform density on S^2 for every direction.
    const VmfParams uniform{mu, 0.0};
    const UnitVector other = UnitVector::from_unit({1.0, 0.0, 0.0});
    CHECK(log_density(other, uniform, NormMode::exact) ==
          doctest::Approx(-2.5310242469692907).epsilon(1e-12));
    CHECK(log_density(mu, uniform, NormMode::approx) ==
          doctest::Approx(-2.5310242469692907).epsilon(1e-12));

    const UnitVector d2 = UnitVector::from_unit({1.0, 0.0});
    CHECK_THROWS_AS(log_density(d2, params, NormMode::exact), DimensionMismatch);
}

TEST_CASE("exact and approximated density agree for d = 3, kappa in [10, 200]") {
    const UnitVector mu = UnitVector::from_unit({0.0, 1.0, 0.0});
    const UnitVector x = UnitVector::from_unit({1.0, 0.0, 0.0});
    for (double kappa : {10.0, 25.0, 50.0, 100.0, 150.0, 200.0}) {
        const VmfParams params{mu, kappa};
        CHECK(std::abs(log_density(x, params, NormMode::exact) -
                       log_density(x, params, NormMode::approx)) <= 0.05);
    }
}

TEST_CASE("concentration estimator closed-form values") {
    CHECK(estimate_kappa(0.0, 3) == 0.0);
    CHECK(estimate_kappa(0.0, 17) == 0.0);
    CHECK(estimate_kappa(0.5, 3) == doctest::Approx(0.5 * (3.0 - 0.25) / 0.75).epsilon(1e-14));
    CHECK(estimate_kappa(0.5, 3) == doctest::Approx(1.8333333333333333).epsilon(1e-12));
    CHECK(estimate_kappa(0.9, 3) == doctest::Approx(10.373684210526319).epsilon(1e-12));
    CHECK_THROWS_AS(estimate_kappa(1.0, 3), Error);
    CHECK_THROWS_AS(estimate_kappa(-0.1, 3), Error);
    // The clamp keeps coincident-point clusters finite.
    CHECK(estimate_kappa(kRBarMax, 3) == kKappaMax);
}

TEST_CASE("concentration estimator is strictly increasing in r_bar") {
    for (std::size_t d : {2, 3, 4, 10}) {
        double prev = -1.0;
        for (double r = 0.0; r < 0.999; r += 0.013) {
            const double kappa = estimate_kappa(r, d);
            CHECK(kappa > prev);
            prev = kappa;
        }
    }
}

TEST_CASE("Banerjee estimate approximately inverts the Bessel ratio") {
    for (std::size_t d : {2, 3, 4, 10}) {
        for (double r : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const double kappa = estimate_kappa(r, d);
            CHECK(std::abs(bessel_ratio_a(d, kappa) - r) <= 0.05);
        }
    }
}

TEST_CASE("mean direction estimate examples") {
    PointSet points(3);
    points.add(UnitVector::from_unit({0.0, 0.0, 1.0}));
    points.add(UnitVector::from_unit({1.0, 0.0, 0.0}));
    points.add(UnitVector::from_unit({0.0, 1.0, 0.0}));
    points.add(UnitVector::from_unit({0.0, 0.0, -1.0}));

    const std::vector<std::uint32_t> single{0};
    CHECK(angle_between(estimate_mu(points, single), points.point(0)) ==
          doctest::Approx(0.0).epsilon(1e-12));

    const std::vector<std::uint32_t> pair{1, 2};
    const UnitVector mid = estimate_mu(points, pair);
    CHECK(mid[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(mid[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    const std::vector<std::uint32_t> antipodal{0, 3};
    CHECK_THROWS_AS(estimate_mu(points, antipodal), DegenerateResultant);
    CHECK_THROWS_AS(estimate_mu(points, std::vector<std::uint32_t>{}), EmptySelection);
}

TEST_CASE("mean direction recovery from 700 concentrated draws") {
    RandomStream rng(42);
    const UnitVector mu = UnitVector::from_unit({0.0, 0.0, -1.0});
    const PointSet sample = sample_vmf(VmfParams{mu, 100.0}, 700, rng);
    std::vector<std::uint32_t> ids = all_ids(sample);
    CHECK(angle_between(estimate_mu(sample, ids), mu) < 0.02);
}

TEST_CASE("sampler determinism and unit-norm invariant") {
    const UnitVector mu = UnitVector::from_unit({1.0, 0.0, 0.0, 0.0});
    RandomStream a(9), b(9);
    const PointSet first = sample_vmf(VmfParams{mu, 25.0}, 200, a);
    const PointSet second = sample_vmf(VmfParams{mu, 25.0}, 200, b);
    CHECK(first == second);
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(std::abs(norm(first[i]) - 1.0) <= 1e-9);
    }
}

TEST_CASE("sampler statistics: uniform, concentrated, and recovery") {
    const UnitVector mu = UnitVector::from_unit({0.0, 0.0, 1.0});
    RandomStream rng(7);

    const PointSet uniform = sample_vmf(VmfParams{mu, 0.0}, 10000, rng);
    CHECK(norm(resultant(uniform)) / 10000.0 < 0.05);

    const PointSet tight = sample_vmf(VmfParams{mu, 100.0}, 10000, rng);
    const double r_bar = norm(resultant(tight)) / 10000.0;
    CHECK(std::abs(r_bar - 0.99) < 0.01);  // A_3(100) = coth(100) - 1/100

    const UnitVector ex = UnitVector::from_unit({1.0, 0.0, 0.0});
    const PointSet mid = sample_vmf(VmfParams{ex, 50.0}, 10000, rng);
    std::vector<std::uint32_t> ids = all_ids(mid);
    CHECK(angle_between(estimate_mu(mid, ids), ex) < 0.03);
}

TEST_CASE("sample then fit round-trip at d = 3") {
    for (double kappa : {40.0, 100.0}) {
        RandomStream rng(static_cast<std::uint64_t>(kappa));
        const UnitVector mu = sample_uniform_direction(3, rng);
        const PointSet sample = sample_vmf(VmfParams{mu, kappa}, 5000, rng);
        std::vector<std::uint32_t> ids = all_ids(sample);
        const MlFit fit = fit_vmf(sample, ids);
        CHECK(angle_between(fit.params.mu, mu) < 0.05);
        CHECK(std::abs(fit.params.kappa - kappa) / kappa < 0.25);
        CHECK(fit.r_bar == doctest::Approx(norm(resultant(sample)) / 5000.0).epsilon(1e-12));
        CHECK(fit.n == 5000);
    }
}

TEST_CASE("density integrates to one on the circle") {
    const UnitVector mu = UnitVector::from_unit({1.0, 0.0});
    const std::size_t grid = 10000;
    for (double kappa : {0.5, 5.0, 50.0}) {
        const VmfParams params{mu, kappa};
        double integral = 0.0;
        for (std::size_t i = 0; i < grid; ++i) {
            const double theta = 2.0 * M_PI * (static_cast<double>(i) + 0.5) /
                                 static_cast<double>(grid);
            const UnitVector x = UnitVector::from_unit({std::cos(theta), std::sin(theta)});
            integral += std::exp(log_density(x, params, NormMode::exact));
        }
        integral *= 2.0 * M_PI / static_cast<double>(grid);
        CHECK(std::abs(integral - 1.0) <= 1e-3);
    }
}

TEST_CASE("vmf params validate concentration") {
    const UnitVector mu = UnitVector::from_unit({1.0, 0.0});
    CHECK_THROWS_AS(VmfParams(mu, -1.0), Error);
    CHECK_THROWS_AS(VmfParams(mu, kKappaMax * 2.0), Error);
}
