#include <cmath>
#include <random>

#include "doctest.h"
#include "srd/barriers.hpp"
#include "srd/errors.hpp"

using namespace srd;

namespace {

// Central-difference oracle for the radial Laplacian g_rr + (n-1)/r g_r of a
// radial function given as g(r2); uses the even extension across r = 0.
double fd_laplacian(const Barrier& b, double r2, double t, int n) {
    const double r = std::sqrt(r2);
    const double h = 1e-3 * (1.0 + r);
    auto g = [&](double rr) { return eval(b, rr * rr, t); };
    const double g0 = g(r);
    const double gp = g(r + h);
    const double gm = g(std::abs(r - h));
    const double grr = (gp - 2.0 * g0 + gm) / (h * h);
    if (r == 0.0) return n * grr;
    return grr + (n - 1) / r * (gp - gm) / (2.0 * h);
}

double fd_time(const Barrier& b, double r2, double t, double h) {
    return (eval(b, r2, t + h) - eval(b, r2, t - h)) / (2.0 * h);
}

std::mt19937_64 rng(20240611);
double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

GrowthEnvelope random_envelope() {
    const double nu = uniform(0.1, 4.0);
    const int n = static_cast<int>(uniform(1.0, 6.999));
    const double q = 1.0 / (1.0 + nu);
    double a1 = uniform(q, 1.8);
    // n = 1 needs n + 2 alpha1 - 2 > 0 on the alpha1 <= 1 branch.
    if (n == 1 && a1 <= 0.5) a1 = 0.5 + uniform(0.01, 0.5);
    const double a2 = a1 + uniform(0.0, 1.5);
    const double eps = uniform(0.02, 0.98);
    auto e = derive_growth_params(nu, n, a1, a2, eps);
    return derive_growth_params(nu, n, a1, a2, eps, e.a1 * uniform(1.0, 3.0));
}

}  // namespace

TEST_CASE("growth constants follow the branch formulas") {
    auto e = derive_growth_params(1.0, 3, 0.5, 0.5, 0.5);
    CHECK(e.a1 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e.a2 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e.b1 == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(e.b2 == doctest::Approx(6.0).epsilon(1e-14));

    auto edge = derive_growth_params(1.0, 2, 1.0, 1.0, 0.5);
    CHECK(edge.a1 == doctest::Approx(std::pow(2.0, -0.5)).epsilon(1e-14));
    // alpha1 slightly above 1 takes the n branch and must be continuous.
    auto above = derive_growth_params(1.0, 2, 1.0 + 1e-12, 1.0 + 1e-12, 0.5);
    CHECK(above.a1 == doctest::Approx(edge.a1).epsilon(1e-10));
    CHECK(above.b1 == doctest::Approx(edge.b1).epsilon(1e-10));

    auto steep = derive_growth_params(1.0, 3, 0.5, 2.0, 0.5);
    CHECK(steep.b2 == doctest::Approx(10.0).epsilon(1e-14));

    auto over = derive_growth_params(1.0, 3, 0.5, 0.5, 0.5, 2.5);
    CHECK(over.a2 == 2.5);
}

TEST_CASE("growth constants reject inadmissible inputs") {
    CHECK_THROWS_AS(derive_growth_params(1.0, 3, 0.25, 0.5, 0.5), ConstraintViolation);
    CHECK_THROWS_AS(derive_growth_params(1.0, 3, 0.5, 0.4, 0.5), ConstraintViolation);
    CHECK_THROWS_AS(derive_growth_params(1.0, 3, 0.5, 0.5, 0.0), ConstraintViolation);
    CHECK_THROWS_AS(derive_growth_params(1.0, 3, 0.5, 0.5, 1.0), ConstraintViolation);
    CHECK_THROWS_AS(derive_growth_params(1.0, 3, 0.5, 0.5, 0.5, 0.9), ConstraintViolation);
    CHECK_THROWS_AS(derive_growth_params(0.0, 3, 0.5, 0.5, 0.5), ConstraintViolation);
    // n = 1, alpha1 = 1/2 makes n + 2 alpha1 - 2 vanish.
    CHECK_THROWS_AS(derive_growth_params(1.0, 1, 0.5, 0.5, 0.5), ConstraintViolation);
}

TEST_CASE("decay constants") {
    auto first = derive_decay_params(1.0, 4, 0.5, 1.0);
    CHECK(first.a3 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    auto second = derive_decay_params(1.0, 2, 0.5, 1.0);
    CHECK(second.a3 == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
    CHECK_THROWS_AS(derive_decay_params(2.0, 4, 0.3, 1.0), ConstraintViolation);
    CHECK_THROWS_AS(derive_decay_params(1.0, 4, 0.0, 1.0), ConstraintViolation);
    CHECK_THROWS_AS(derive_decay_params(1.0, 4, 0.6, 1.0), ConstraintViolation);
    CHECK_THROWS_AS(derive_decay_params(1.0, 4, 0.5, 0.0), ConstraintViolation);
}

TEST_CASE("cone constants") {
    auto c = derive_cone_params(1.0, 1, std::pow(2.0, -0.5), 1.0);
    CHECK(c.slope == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(c.horizon == doctest::Approx(0.5).epsilon(1e-13));
    auto d = derive_cone_params(1.0, 3, 0.5, 3.0);
    CHECK(d.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(d.horizon == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(d.horizon * d.slope == doctest::Approx(d.t1).epsilon(1e-14));
    CHECK_THROWS_AS(derive_cone_params(1.0, 1, 1.0, 1.0), ConstraintViolation);
    CHECK_THROWS_AS(derive_cone_params(1.0, 1, 0.5, 0.0), ConstraintViolation);
}

TEST_CASE("closed-form values at reference points") {
    Barrier h = make_homogeneous(1.0, 0.5);
    CHECK(eval(h, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eval(h, 7.0, 0.5 - 1e-12) > 0.0);
    CHECK(eval(h, 7.0, 0.5 - 1e-12) < 1e-5);
    CHECK_THROWS_AS(eval(h, 0.0, 0.5), DomainError);
    CHECK(laplacian(h, 3.0, 0.2) == 0.0);

    auto env = derive_growth_params(1.0, 3, 0.5, 0.5, 0.5);
    Barrier lower = GrowthLower{env};
    CHECK(eval(lower, 0.0, 0.0) == doctest::Approx(1.0));
    CHECK(laplacian(lower, 0.0, 0.0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(time_derivative(lower, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(residual(lower, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));

    Barrier decay = DecaySupersolution{derive_decay_params(1.0, 4, 0.5, 1.0)};
    CHECK_THROWS_AS(eval(decay, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(residual(decay, 0.0, 2.0), DomainError);

    Barrier cone = ConeSupersolution{derive_cone_params(1.0, 1, std::pow(2.0, -0.5), 1.0)};
    const double T = horizon_of(cone).value();
    CHECK(eval(cone, 0.0, T) == 0.0);
    CHECK_THROWS_AS(eval(cone, 0.0, T * 1.01), DomainError);
    CHECK_THROWS_AS(laplacian(cone, 0.0, T), DomainError);

    CHECK_THROWS_AS(eval(lower, -1.0, 0.0), DomainError);
}

TEST_CASE("homogeneous residual vanishes") {
    for (double nu : {0.3, 1.0, 2.0, 5.0}) {
        Barrier h = make_homogeneous(nu, 0.7);
        for (double t : {0.0, 0.1, 0.35, 0.69}) CHECK(std::abs(residual(h, 4.0, t)) <= 1e-12);
    }
}

TEST_CASE("analytic derivatives agree with central differences") {
    auto env = derive_growth_params(1.0, 3, 0.5, 2.0, 0.5);
    std::vector<Barrier> family{GrowthLower{env}, GrowthUpper{env},
                                DecaySupersolution{derive_decay_params(0.7, 2, 0.4, 1.5)},
                                make_homogeneous(2.0, 0.8),
                                ConeSupersolution{derive_cone_params(1.0, 3, 0.5, 3.0)}};
    for (const auto& b : family) {
        const int n = dim_of(b);
        for (double r2 : {0.0, 0.3, 2.0, 17.0, 400.0}) {
            for (double frac : {0.1, 0.5, 0.9}) {
                const double t = horizon_of(b) ? frac * *horizon_of(b) : 3.0 * frac;
                const double lap = laplacian(b, r2, t);
                CHECK(std::abs(lap - fd_laplacian(b, r2, t, n)) / (1.0 + std::abs(lap)) <= 1e-6);
                const double tau = horizon_of(b) ? *horizon_of(b) - t : 1.0 + t;
                const double dt = time_derivative(b, r2, t);
                CHECK(std::abs(dt - fd_time(b, r2, t, 1e-3 * tau)) / (1.0 + std::abs(dt)) <= 1e-6);
            }
        }
    }
}

TEST_CASE("property: residual signs over random admissible parameters") {
    for (int trial = 0; trial < 400; ++trial) {
        const auto env = random_envelope();
        const Barrier lower = GrowthLower{env};
        const Barrier upper = GrowthUpper{env};
        for (int k = 0; k < 25; ++k) {
            const double r2 = std::pow(10.0, uniform(-4.0, 4.0)) * (k == 0 ? 0.0 : 1.0);
            const double t = uniform(0.0, 100.0);
            const double lo = residual(lower, r2, t);
            const double up = residual(upper, r2, t);
            REQUIRE(lo >= -1e-12 * std::pow(1.0 + r2 + t, env.alpha1));
            REQUIRE(lo >= -kSignTolerance * residual_scale(lower, r2, t));
            REQUIRE(up <= kSignTolerance * residual_scale(upper, r2, t));
            REQUIRE(eval(lower, r2, t) <= eval(upper, r2, t));
        }
    }
    for (int trial = 0; trial < 400; ++trial) {
        const double nu = uniform(0.05, 1.0);
        const int n = static_cast<int>(uniform(1.0, 7.999));
        const double beta = uniform(1e-3, 1.0 / (1.0 + nu));
        const Barrier decay = DecaySupersolution{derive_decay_params(nu, n, beta, uniform(0.1, 5.0))};
        const double bound = cone_amplitude_bound(nu, n);
        const Barrier cone = ConeSupersolution{derive_cone_params(nu, n, bound * uniform(0.05, 0.999), uniform(0.1, 4.0))};
        for (int k = 0; k < 25; ++k) {
            const double r2 = std::pow(10.0, uniform(-4.0, 4.0));
            const double td = uniform(0.0, 0.99) * *horizon_of(decay);
            const double tc = uniform(0.0, 0.99) * *horizon_of(cone);
            REQUIRE(residual(decay, r2, td) <= kSignTolerance * residual_scale(decay, r2, td));
            REQUIRE(residual(cone, r2, tc) <= kSignTolerance * residual_scale(cone, r2, tc));
        }
    }
}

TEST_CASE("property: monotonicity in time and space") {
    for (int trial = 0; trial < 200; ++trial) {
        const auto env = random_envelope();
        const Barrier lower = GrowthLower{env};
        const double r2 = uniform(0.0, 50.0);
        const double t = uniform(0.0, 10.0);
        CHECK(eval(lower, r2, t) <= eval(lower, r2, t + 0.5));
        CHECK(eval(lower, r2, t) <= eval(lower, r2 + 0.5, t));
    }
    const std::vector<Barrier> decaying{DecaySupersolution{derive_decay_params(1.0, 3, 0.3, 2.0)},
                                        make_homogeneous(1.5, 2.0),
                                        ConeSupersolution{derive_cone_params(1.0, 2, 0.6, 1.0)}};
    for (const auto& b : decaying) {
        const double T = *horizon_of(b);
        for (int k = 0; k < 100; ++k) {
            const double r2 = uniform(0.0, 50.0);
            const double t = uniform(0.0, 0.9 * T);
            CHECK(eval(b, r2, t + 0.05 * T) <= eval(b, r2, t));
        }
    }
}

TEST_CASE("sign verdicts on tensor grids") {
    auto env = derive_growth_params(1.0, 3, 0.5, 0.5, 0.5);
    auto lower = verify_sign_on_grid(GrowthLower{env}, 100.0, 10.0, 100);
    CHECK(lower.passed);
    CHECK(lower.expected == SignExpectation::Nonnegative);
    CHECK(lower.min_residual >= 0.0);

    auto cone = verify_sign_on_grid(ConeSupersolution{derive_cone_params(1.0, 1, std::pow(2.0, -0.5), 1.0)}, 25.0,
                                    0.45, 60);
    CHECK(cone.passed);
    CHECK(cone.expected == SignExpectation::Nonpositive);
    CHECK(cone.max_residual <= 1e-12);

    auto homo = verify_sign_on_grid(make_homogeneous(1.0, 0.5), 25.0, 0.45, 40);
    CHECK(homo.passed);
    CHECK(homo.expected == SignExpectation::Zero);
    CHECK(std::abs(homo.min_residual) <= 1e-12);
    CHECK(std::abs(homo.max_residual) <= 1e-12);

    // Same seed, same report.
    auto again = verify_sign_on_grid(GrowthLower{env}, 100.0, 10.0, 100);
    CHECK(again.min_residual == lower.min_residual);
    CHECK(again.worst_relative == lower.worst_relative);
}
