#include <doctest.h>

#include <cmath>

#include "kawa/core_model.hpp"
#include "kawa/error.hpp"
#include "kawa/problem_io.hpp"
#include "support/oracles.hpp"

using namespace kawa;

TEST_CASE("cubic_exp weight derivatives match the polynomial recursion") {
    const Weight w = preset_weight("cubic_exp");
    for (double x : {0.0, 0.3, 1.7, 6.0, 25.0}) {
        const auto got = w(x);
        const auto want = oracle::poly_exp_derivatives({0.0, 0.0, 0.0, 1.0}, 1.0, x);
        for (std::size_t k = 0; k < 6; ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-12));
    }
    CHECK(w(0.0)[0] == 0.0);
    CHECK(w(0.0)[3] == doctest::Approx(6.0));
}

TEST_CASE("dilated and amplitude-scaled weights") {
    const Weight w = preset_weight("cubic_exp");
    const Weight d = w.dilated(0.5).scaled_amplitude(3.0);
    const auto a = d(2.0);
    const auto b = w(1.0);
    for (int k = 0; k < 6; ++k) CHECK(a[static_cast<std::size_t>(k)] == doctest::Approx(3.0 * std::pow(0.5, k) * b[static_cast<std::size_t>(k)]));
}

TEST_CASE("unknown presets are configuration errors") {
    CHECK_THROWS_AS(preset_weight("nope"), ConfigError);
    ProblemSpec s = canonical_problem_spec();
    s.u0 = DataSpec::named("nope");
    CHECK_THROWS_AS(build_problem(s), ConfigError);
}

TEST_CASE("grid counts and divisibility") {
    const SpaceTimeGrid g = SpaceTimeGrid::make({DomainKind::RightHalfLine, 40.0, 0.0}, 0.02, 5e-4, 1.0);
    CHECK(g.n_space == 2000);
    CHECK(g.n_time == 2000);
    CHECK(g.x(g.n_space) == doctest::Approx(40.0));
    CHECK_THROWS_AS(SpaceTimeGrid::make({DomainKind::RightHalfLine, 40.0, 0.0}, 0.03, 5e-4, 1.0), ValidationError);
    const SpaceTimeGrid r = SpaceTimeGrid::make({DomainKind::RealLine, 10.0, 5.0}, 0.5, 0.1, 1.0);
    CHECK(r.x_left == -5.0);
    CHECK(r.n_space == 30);
}

TEST_CASE("canonical problem validates") {
    const Problem pb = build_problem(canonical_problem_spec());
    const ValidationReport rep = validate_problem(pb);
    CHECK(rep.passed());
    CHECK_NOTHROW(require_valid(rep));
}

TEST_CASE("incompatible phi(0) is a validation error") {
    ProblemSpec s = canonical_problem_spec();
    s.phi = DataSpec::named("constant", {{"offset", 0.0}, {"scale", 1.0}});
    const ValidationReport rep = validate_problem(build_problem(s));
    CHECK_FALSE(rep.passed());
    CHECK_THROWS_AS(require_valid(rep), ValidationError);
}

TEST_CASE("g0 above the observed |g1| is a hypothesis error") {
    ProblemSpec s = canonical_problem_spec();
    s.g0 = 10.0;
    const ValidationReport rep = validate_problem(build_problem(s));
    CHECK(rep.only_hypotheses_failed());
    CHECK_THROWS_AS(require_valid(rep), HypothesisError);
}

TEST_CASE("validation is pure") {
    const Problem pb = build_problem(canonical_problem_spec());
    CHECK(validate_problem(pb).summary() == validate_problem(pb).summary());
}

TEST_CASE("quadrature and norms") {
    std::vector<double> lin(11);
    for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = 2.0 * static_cast<double>(i) * 0.1;
    CHECK(trapezoid(lin, 0.1) == doctest::Approx(1.0));
    CHECK(l2_norm(std::vector<double>(11, 1.0), 0.1) == doctest::Approx(1.0));

    TimeSignal s;
    s.dt = 0.25;
    s.samples = {1.0, -3.0, 2.0, 0.5, 0.0};
    CHECK(lp_time_norm(s, kInfinity) == 3.0);
    double sq = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double w = (i == 0 || i + 1 == s.size()) ? 0.5 : 1.0;
        sq += w * s.samples[i] * s.samples[i] * s.dt;
    }
    CHECK(lp_time_norm(s, 2.0) == doctest::Approx(std::sqrt(sq)));
    CHECK(fractional_sobolev_norm(s, 0.0) == doctest::Approx(std::sqrt(sq)).epsilon(1e-12));
    CHECK(fractional_sobolev_norm(s, 0.4) >= fractional_sobolev_norm(s, 0.0));
}

TEST_CASE("time presets carry exact derivatives") {
    const auto [v, d] = eval_time_preset(DataSpec::named("t_exp", {{"scale", 0.01}, {"rate", 1.0}}), 0.5);
    CHECK(v == doctest::Approx(0.01 * 0.5 * std::exp(-0.5)));
    CHECK(d == doctest::Approx(0.01 * (1.0 - 0.5) * std::exp(-0.5)));
}
