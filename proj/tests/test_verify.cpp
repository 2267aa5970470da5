#include "ksup/grid.hpp"
#include "ksup/plfun.hpp"
#include "ksup/verify/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ksup;

TEST_CASE("coverage oracle examples") {
    CHECK(verify::oracle_coverage(3, 0.1) == 2);
    CHECK(verify::oracle_coverage(7, 0.01) == 6);
}

TEST_CASE("grid endpoints are covered by every family") {
    for (int m : {3, 5, 7}) {
        const double delta = 0.1;
        for (int k = 1; k <= m; ++k) {
            int c = 0;
            for (int q = 1; q <= m; ++q)
                c += verify::in_family(k * delta, q, m, delta) ? 1 : 0;
            CHECK(c == m);
        }
    }
}

TEST_CASE("membership agrees with the interval builder") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> mm(2, 9);
    std::uniform_real_distribution<double> dd(0.005, 0.05);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = mm(rng);
        const double delta = dd(rng) / m;
        std::vector<IntervalFamily> fams;
        for (int q = 1; q <= m; ++q)
            fams.push_back(build_family_unchecked(q, m, delta, 1.0));
        std::uniform_real_distribution<double> xs(-0.9, 0.9);
        for (int k = 0; k < 200; ++k) {
            const double x = xs(rng);
            int want = 0;
            for (int q = 1; q <= m; ++q)
                want += verify::in_family(x, q, m, delta) ? 1 : 0;
            REQUIRE(coverage_count(x, fams) == want);
        }
    }
}

TEST_CASE("box coverage oracle") {
    CHECK(verify::oracle_box_coverage(2, 7, 0.9 / 14.0, 10000, 1) >= 5);
    CHECK(verify::oracle_box_coverage(3, 11, 0.01, 5000, 2) >= 8);
    CHECK(verify::oracle_box_coverage(1, 5, 0.03, 20000, 3) == verify::oracle_coverage(5, 0.03));
}

TEST_CASE("sup norm oracle") {
    CHECK(verify::oracle_sup_norm(PL1D::zero(), -1.0, 1.0) == 0.0);
    const PL1D tent({-1.0, 0.0, 1.0}, {0.0, 5.0, 0.0});
    CHECK(verify::oracle_sup_norm(tent, -2.0, 2.0) == doctest::Approx(5.0).epsilon(1e-3));

    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> xs(50);
        std::vector<double> ys(50);
        for (auto& x : xs)
            x = 3.0 * u(rng);
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        ys.resize(xs.size());
        for (auto& y : ys)
            y = 4.0 * u(rng);
        const PL1D f(xs, ys);
        const double a = -3.5;
        const double b = 3.5;
        const int res = 10000;
        const double exact = sup_norm(f, a, b);
        const double oracle = verify::oracle_sup_norm(f, a, b, res);
        REQUIRE(oracle <= exact + 1e-12);
        REQUIRE(exact - oracle <= f.max_slope() * (b - a) / (res - 1) + 1e-12);
    }
}
