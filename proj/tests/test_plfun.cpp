#include "ksup/plateau.hpp"
#include "ksup/plfun.hpp"
#include "ksup/verify/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ksup;

TEST_CASE("evaluation interpolates and extends") {
    PL1D f({0.0, 1.0}, {0.0, 1.0});
    CHECK(f(0.5) == 0.5);
    CHECK(f(-7.0) == 0.0);
    CHECK(f(9.0) == 1.0);

    PL1D g({0.0, 1.0}, {0.0, 1.0}, Extension::Affine, Extension::Affine);
    CHECK(g(-7.0) == -7.0);
    CHECK(g(3.0) == 3.0);
}

TEST_CASE("breakpoints evaluate to the stored values exactly") {
    std::vector<double> xs{-1.3, 0.1, 0.7, 2.9};
    std::vector<double> ys{0.3, -0.1 / 3.0, 1e-17, 5.5};
    PL1D f(xs, ys);
    for (std::size_t i = 0; i < xs.size(); ++i)
        CHECK(f(xs[i]) == ys[i]);
}

TEST_CASE("empty function is zero") {
    PL1D z;
    CHECK(z(0.0) == 0.0);
    CHECK(z(-1e9) == 0.0);
    CHECK(sup_norm(z, -3.0, 4.0) == 0.0);
}

TEST_CASE("malformed input is rejected") {
    CHECK_THROWS_AS(PL1D({0.0, 0.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(PL1D({1.0, 0.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(PL1D({0.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(PL1D({0.0, NAN}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("sup_norm") {
    PL1D tent({0.0, 1.0, 2.0}, {0.0, 5.0, 0.0});
    CHECK(sup_norm(tent, 0.0, 2.0) == 5.0);
    CHECK(sup_norm(tent, 1.5, 2.0) == 2.5);

    PL1D ramp({0.0, 2.0}, {-4.0, 4.0});
    CHECK(sup_norm(ramp, 0.0, 1.0) == 4.0);
    CHECK(sup_norm(ramp, 0.5, 1.5) == 2.0);

    CHECK_THROWS_AS(sup_norm(tent, 1.0, 0.0), InvalidInterval);

    PL1D affine({0.0, 1.0}, {0.0, 1.0}, Extension::Constant, Extension::Affine);
    CHECK(std::isinf(sup_norm(affine)));
    CHECK(sup_norm(tent) == 5.0);
}

TEST_CASE("sup_norm agrees with a dense scan") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> xs(50);
        std::vector<double> ys(50);
        for (auto& x : xs)
            x = u(rng);
        std::sort(xs.begin(), xs.end());
        for (auto& y : ys)
            y = u(rng);
        PL1D f(xs, ys);
        const double a = -4.0;
        const double b = 4.0;
        const int res = 20000;
        const double exact = sup_norm(f, a, b);
        const double scan = verify::oracle_sup_norm(f, a, b, res);
        CHECK(scan <= exact);
        CHECK(exact - scan <= f.max_slope() * (b - a) / (res - 1) + 1e-12);
    }
}

TEST_CASE("add and scale") {
    PL1D f({-1.0, 0.0, 2.0}, {1.0, -2.0, 0.5});
    PL1D g({-0.5, 1.0}, {3.0, 1.0}, Extension::Affine, Extension::Constant);

    for (double x = -3.0; x <= 3.0; x += 0.01) {
        CHECK(add(f, PL1D::zero())(x) == doctest::Approx(f(x)).epsilon(1e-15));
        CHECK(scale(f, 0.0)(x) == 0.0);
        CHECK(add(f, f)(x) == doctest::Approx(2.0 * f(x)).epsilon(1e-15));
        const double want = f(x) + g(x);
        CHECK(std::abs(add(f, g)(x) - want) <= 8 * std::numeric_limits<double>::epsilon() *
                                                     std::max(1.0, std::abs(want)));
    }
    // breakpoint set of a sum is the merged set
    CHECK(add(f, PL1D({-1.0, 5.0}, {0.0, 0.0})).size() == 4);
}

TEST_CASE("sum keeps affine tails outside the merged breakpoints") {
    PL1D a({0.0, 1.0}, {0.0, 1.0}, Extension::Affine, Extension::Affine);
    PL1D b({5.0, 6.0}, {0.0, 0.0});
    const PL1D fs[] = {a, b};
    PL1D s = sum(fs);
    CHECK(s(-10.0) == doctest::Approx(-10.0));
    CHECK(s(20.0) == doctest::Approx(20.0));
}

TEST_CASE("plateau function is constant on its plateaus and continuous") {
    std::vector<Plateau> plats{{0.1, 0.3, 0.2}, {0.4, 0.6, 0.5}, {0.7, 0.9, 0.8}};
    PlateauFunction f(plats, Baseline::Abs, 0.1);
    for (const auto& p : plats) {
        CHECK(f(p.lo) == p.value);
        CHECK(f(p.hi) == p.value);
        CHECK(f(0.5 * (p.lo + p.hi)) == p.value);
    }
    // far out it is the baseline again
    CHECK(f(-5.0) == doctest::Approx(5.0));
    CHECK(f(7.0) == doctest::Approx(7.0));

    for (double x = -3.0; x <= 3.0; x += 1e-3)
        CHECK(std::abs(f(x) - std::abs(x)) < 1.0);
    CHECK(f.baseline_deviation() < 1.0);
}

TEST_CASE("identity plateau functions are increasing") {
    std::vector<Plateau> plats{{-1.0, -0.8, -0.9}, {-0.5, -0.3, -0.4}, {0.2, 0.4, 0.3}};
    PlateauFunction f(plats, Baseline::Identity, 0.05);
    CHECK(f.is_increasing(true));
    CHECK(f(-10.0) == doctest::Approx(-10.0));

    plats[1].value = -0.95;
    PlateauFunction g(plats, Baseline::Identity, 0.05);
    CHECK_FALSE(g.is_increasing(true));
}

TEST_CASE("bare baselines") {
    auto a = PlateauFunction::identity_of(Baseline::Abs);
    CHECK(a(-2.5) == 2.5);
    CHECK(a.baseline_deviation() == 0.0);
    auto i = PlateauFunction::identity_of(Baseline::Identity);
    CHECK(i(-2.5) == -2.5);
}
