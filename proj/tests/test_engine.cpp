#include "ksup/constants.hpp"
#include "ksup/engine.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ksup;

namespace {

const Scheme& scheme27() {
    static const Scheme s = standard_scheme(derive(2, 7, {0.4, 0.6}));
    return s;
}

StopRule one_stage() {
    StopRule r;
    r.k_max = 1;
    return r;
}

const Representation& gauss_run() {
    static const Representation rep = run(make_target("gauss-bump", 2), scheme27(), one_stage());
    return rep;
}

} // namespace

TEST_CASE("zero target: g vanishes and the trace has one row") {
    const auto rep = run(make_target("zero", 2), scheme27(), StopRule{});
    CHECK(rep.status == RunStatus::ZeroResidual);
    REQUIRE(rep.trace.size() == 1);
    CHECK(rep.trace[0].zero_branch);
    CHECK(sup_norm(rep.g) == 0.0);
    const double x[] = {0.3, -0.7};
    CHECK(eval_representation(rep, x) == 0.0);
    for (const auto& r : check_trace(rep))
        CHECK_MESSAGE(r.ok, r.name << ": " << r.detail);
}

TEST_CASE("evaluation through a hand-built representation") {
    Representation rep;
    rep.scheme = scheme27();
    rep.family.assign(7, PlateauFunction::identity_of(Baseline::Abs));
    rep.g = PL1D({1.6 - 1e-3, 1.6, 1.6 + 1e-3}, {0.0, 2.0, 0.0});
    const double x[] = {1.0, 2.0};
    CHECK(eval_representation(rep, x) == doctest::Approx(14.0));
    rep.output_scale = 0.5;
    CHECK(eval_representation(rep, x) == doctest::Approx(7.0));
    const double y[] = {1.0, 1.0};
    CHECK(eval_representation(rep, y) == 0.0);
}

TEST_CASE("residual with no stages is the target") {
    const auto f = make_target("runge", 2);
    const std::vector<PlateauFunction> family(7, PlateauFunction::identity_of(Baseline::Abs));
    const auto r = residual(f.eval, {}, family, scheme27());
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const double x[] = {u(rng), u(rng)};
        CHECK(r(x) == f(x));
    }
}

TEST_CASE("one gauss-bump stage") {
    const auto& rep = gauss_run();
    CHECK(rep.status == RunStatus::Completed);
    REQUIRE(rep.trace.size() == 1);
    REQUIRE(rep.stages.size() == 1);
    const auto& r = rep.trace[0];
    CHECK(r.eta == doctest::Approx(scheme27().eps - scheme27().eps0).epsilon(1e-3));
    CHECK(r.lhs[0] < r.rhs[0]);
    CHECK(rep.final_M[0] < 0.45);
    CHECK(r.radius > 0.0);
    CHECK(r.budget_spent < r.xi);
    for (const auto& c : check_trace(rep))
        CHECK_MESSAGE(c.ok, c.name << ": " << c.detail);
    for (const auto& c : reverify(rep, make_target("gauss-bump", 2)))
        CHECK_MESSAGE(c.ok(), c.describe());
}

TEST_CASE("telescoping: f_0 = f_K + sum_q g(X_q)") {
    const auto& rep = gauss_run();
    const auto f0 = make_target("gauss-bump", 2);
    const auto fK = residual(f0.eval, rep.stages, rep.family, rep.scheme);
    std::vector<double> x;
    CubeGrid grid(2, 1.0, 41);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        grid.point(k, x);
        REQUIRE(std::abs(f0(x) - fK(x) - eval_representation(rep, x)) < 1e-12);
    }
}

TEST_CASE("g is the sum of the stages") {
    const auto& rep = gauss_run();
    const PL1D s = sum(rep.stages);
    CHECK(s.breakpoints() == rep.g.breakpoints());
    CHECK(s.values() == rep.g.values());
}

TEST_CASE("a second stage is out of reach and the run aborts cleanly") {
    StopRule stop;
    stop.k_max = 3;
    stop.tol = 0.0;
    const auto rep = run(make_target("gauss-bump", 2), scheme27(), stop);
    CHECK(rep.status == RunStatus::Aborted);
    CHECK(rep.abort_stage == 1);
    CHECK(rep.abort_reason.find("boxes") != std::string::npos);
    CHECK(rep.stages.size() == 1);
    CHECK(rep.trace.size() == 1);
    const double x[] = {0.2, 0.1};
    CHECK(eval_representation(rep, x) == eval_representation(gauss_run(), x));
}

TEST_CASE("targets above 1 are scaled and scaled back") {
    const auto rep = run(make_target("const:3", 2), scheme27(), one_stage());
    CHECK(rep.output_scale == 3.0);
    const double x[] = {0.5, -0.5};
    CHECK(std::abs(eval_representation(rep, x) - 3.0) < 3.0 * rep.final_M[0] + 1e-12);
}

TEST_CASE("wrapper identities") {
    const auto z = wrap_unbounded(make_target("zero", 2));
    const double x0[] = {1.0, 2.0};
    CHECK(z(x0) == 0.0);
    CHECK(unwrap(0.0).value == 0.0);

    const auto one = wrap_unbounded(make_target("const:1", 2));
    CHECK(one(x0) == doctest::Approx(0.5 * kWrapShrink));
    CHECK(unwrap(0.5 * kWrapShrink).value == doctest::Approx(1.0));

    TargetFunction lin;
    lin.name = "x1";
    lin.n = 2;
    lin.eval = [](std::span<const double> x) { return x[0]; };
    lin.bound = INFINITY;
    lin.lipschitz = [](double) { return 1.0; };
    const auto w = wrap_unbounded(lin);
    CHECK(w.bound < 1.0);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int k = 0; k < 1000; ++k) {
        const double x[] = {u(rng), u(rng)};
        const double v = w(x);
        REQUIRE(std::abs(v) < kWrapShrink);
        const auto back = unwrap(v);
        REQUIRE_FALSE(back.clamped);
        REQUIRE(std::abs(back.value - x[0]) < 1e-12 * std::max(1.0, std::abs(x[0])));
    }

    CHECK(unwrap(0.995).clamped);
    CHECK(unwrap(-1.2).clamped);
    CHECK(std::isfinite(unwrap(1.5).value));
}

TEST_CASE("check_trace catches forged rows") {
    SUBCASE("growth and envelope") {
        auto rep = gauss_run();
        rep.final_M[1] = 1e6;
        const auto rows = check_trace(rep);
        CHECK_FALSE(rows[0].ok);
        CHECK_FALSE(rows[2].ok);
    }
    SUBCASE("contraction") {
        auto rep = gauss_run();
        rep.final_M[0] = rep.trace[0].eta + scheme27().eps1 * rep.trace[0].M[1];
        CHECK_FALSE(check_trace(rep)[1].ok);
    }
    SUBCASE("h norm") {
        auto rep = gauss_run();
        rep.trace[0].h_norm = 2.0;
        CHECK_FALSE(check_trace(rep)[3].ok);
    }
    SUBCASE("recorded residual") {
        auto rep = gauss_run();
        rep.trace[0].lhs[0] = rep.trace[0].rhs[0];
        CHECK_FALSE(check_trace(rep)[5].ok);
    }
}

TEST_CASE("sampled Lipschitz estimate") {
    Evaluator f = [](std::span<const double> x) { return 3.0 * x[0] - 4.0 * x[1]; };
    const double L = estimate_lipschitz(f, 2, 1.0, 4000, 11);
    CHECK(L > 5.0);
    CHECK(L <= 10.0 + 1e-9);
}

TEST_CASE("run rejects bad arguments") {
    StopRule bad;
    bad.t_max = 0;
    CHECK_THROWS_AS(run(make_target("zero", 2), scheme27(), bad), std::invalid_argument);
    CHECK_THROWS_AS(run(make_target("zero", 3), scheme27(), StopRule{}), std::invalid_argument);
}

TEST_CASE("status names round-trip") {
    for (auto st : {RunStatus::Completed, RunStatus::Converged, RunStatus::ZeroResidual,
                    RunStatus::Aborted})
        CHECK(run_status_from_string(to_string(st)) == st);
}
