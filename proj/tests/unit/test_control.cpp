#include <doctest.h>

#include <cmath>

#include "kawa/control.hpp"
#include "kawa/error.hpp"
#include "kawa/problem_io.hpp"
#include "support/oracles.hpp"

using namespace kawa;

namespace {

ProblemSpec coarse_spec() {
    ProblemSpec s = canonical_problem_spec();
    s.h = 0.05;
    s.tau = 2e-3;
    s.T = 0.5;
    return s;
}

}  // namespace

TEST_CASE("c0 and gamma* follow their formulas") {
    const Problem pb = build_problem(canonical_problem_spec());
    const ContractionConstants c = compute_constants(pb);
    CHECK(c.c0 == doctest::Approx(oracle::c0_cubic_exp(1.0, 1.0, 0.375, 1.0, 1.0, 40.0)).epsilon(1e-3));
    CHECK(c.c0 == doctest::Approx(2.0 / c.g0 * c.g_sup_l2 * c.weight_combination).epsilon(1e-15));
    // p = 2: gamma* = (2 c0 T^{1/2})^2 / 2.
    CHECK(c.gamma_star == doctest::Approx(2.0 * c.c0 * c.c0 * pb.grid.T));
    ProblemSpec s = canonical_problem_spec();
    s.p = kInfinity;
    CHECK(compute_constants(build_problem(s)).gamma_star == doctest::Approx(2.0 * c.c0));
}

TEST_CASE("g1 lower bound is a hypothesis") {
    const Problem pb = build_problem(coarse_spec());
    const G1Trace g = g1_trace(pb.g, pb.omega, pb.grid, pb.g0);
    // int e^{-x} x^3 e^{-x} dx = 6/16.
    CHECK(g.min_abs == doctest::Approx(0.375).epsilon(1e-3));
    CHECK_THROWS_AS(g1_trace(pb.g, pb.omega, pb.grid, 0.5), HypothesisError);

    ProblemSpec s = coarse_spec();
    s.g = DataSpec::named("sign_change", {{"scale", 1.0}, {"rate", 1.0}, {"freq", 5.0}});
    s.g0 = 0.01;
    const Problem bad = build_problem(s);
    CHECK_THROWS_AS(g1_trace(bad.g, bad.omega, bad.grid, bad.g0), HypothesisError);
}

TEST_CASE("Gamma requires phi(0) = 0") {
    const Problem pb = build_problem(coarse_spec());
    TimeSignal phi = pb.phi;
    phi.samples[0] = 1.0;
    CHECK_THROWS_AS(solve_gamma(phi, pb), PreconditionError);
}

TEST_CASE("the Gamma fixed point is a fixed point of A") {
    const Problem pb = build_problem(coarse_spec());
    const ControlResult r = solve_gamma(pb.phi, pb);
    CHECK(r.converged);
    CHECK(r.residual <= 1e-10 * r.scale);
    const TimeSignal again = apply_A(r.f0, pb);
    CHECK(oracle::max_diff(again.samples, r.f0.samples) <= 1e-8 * r.f0.max_abs());
    CHECK(r.constants.kappa_measured <= 0.55);
}

TEST_CASE("an exhausted Picard budget is a non-convergence error") {
    const Problem pb = build_problem(coarse_spec());
    PicardOptions o;
    o.max_iter = 1;
    CHECK_THROWS_AS(solve_gamma(pb.phi, pb, o), IterationError);
}

TEST_CASE("zero target gives zero control") {
    ProblemSpec s = coarse_spec();
    s.phi = DataSpec::named("zero");
    const Problem pb = build_problem(s);
    const ControlResult r = control_linear(pb);
    CHECK(r.f0.max_abs() == 0.0);
    CHECK(r.residual == 0.0);
    CHECK(data_size(pb) == 0.0);
}

TEST_CASE("linear control with initial data tracks phi") {
    ProblemSpec s = coarse_spec();
    s.u0 = DataSpec::named("gaussian", {{"scale", 0.02}, {"center", 4.0}, {"width", 1.0}});
    const Problem probe = build_problem(s);
    const double m0 = trapezoid_product(probe.u0, probe.omega.samples(0), probe.grid.h);
    s.phi = DataSpec::named("t_exp", {{"offset", m0}, {"scale", 0.01}, {"rate", 1.0}});
    const Problem pb = build_problem(s);
    const ControlResult r = control_linear(pb);
    CHECK(r.residual <= 1e-9 * r.scale);
}

TEST_CASE("refined bound is skipped outside its hypothesis") {
    const Problem pb = build_problem(coarse_spec());
    const ControlResult r = solve_gamma(pb.phi, pb);
    CHECK(refined_bound_check(r, pb).verdict == Verdict::Skipped);
}

TEST_CASE("mass control rejects an incompatible target") {
    const Problem pb = build_problem(coarse_spec());
    const ControlResult r = solve_gamma(pb.phi, pb);
    std::vector<double> uT(pb.grid.space_nodes(), 0.0);
    uT[100] = 1.0;
    CHECK_THROWS_AS(mass_control_check(pb, uT, r), PreconditionError);
    CHECK_THROWS_AS(mass_control_check(pb, std::vector<double>(3), r), DimensionError);
}

TEST_CASE("nonlinear control with a fixed C_T") {
    ProblemSpec s = coarse_spec();
    const Problem pb = build_problem(s);
    NonlinearOptions o;
    o.solution_constant = 1.0;
    const ControlResult r = control_nonlinear(pb, o);
    CHECK(r.smallness == Verdict::Pass);
    CHECK(r.closed_loop_residual <= 1e-9 * r.scale);
    CHECK(r.outer_ratios.back() <= 0.5);
    CHECK(r.solution_constant == 1.0);
    CHECK(r.smallness_threshold == doctest::Approx(1.0 / (8.0 * (std::sqrt(0.5) + 1.0))));
}

TEST_CASE("large data raise the smallness advisory") {
    ProblemSpec s = coarse_spec();
    s.phi = DataSpec::named("t_exp", {{"scale", 0.2}, {"rate", 1.0}});
    const Problem pb = build_problem(s);
    NonlinearOptions o;
    o.solution_constant = 5.0;
    const ControlResult r = control_nonlinear(pb, o);
    CHECK(r.smallness == Verdict::Advisory);
    CHECK_FALSE(r.warnings.empty());
}
