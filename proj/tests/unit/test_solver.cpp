#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "kawa/error.hpp"
#include "kawa/problem_io.hpp"
#include "kawa/solver.hpp"
#include "support/oracles.hpp"

using namespace kawa;

namespace {

Problem coarse_canonical() {
    ProblemSpec s = canonical_problem_spec();
    s.h = 0.05;
    s.tau = 2e-3;
    return build_problem(s);
}

}  // namespace

TEST_CASE("zero data give the zero solution") {
    ProblemSpec s = canonical_problem_spec();
    s.phi = DataSpec::named("zero");
    const Problem pb = build_problem(s);
    const Trajectory u = solve_nonlinear(pb, Forcing{});
    CHECK(u.values.max_abs() == 0.0);
    CHECK(u.sup_l2() == 0.0);
}

TEST_CASE("manufactured solution converges at second order") {
    std::vector<double> err;
    for (double k : {1.0, 2.0, 4.0}) {
        const Problem pb = oracle::mms_problem(0.1 / k, 0.02 / k, 0.5, 30.0);
        err.push_back(oracle::mms_error(solve_linear(pb, oracle::mms_forcing_field(pb, false))));
    }
    CHECK(err[0] / err[1] > 3.5);
    CHECK(err[1] / err[2] > 3.5);
}

TEST_CASE("boundary values follow the data") {
    const Problem pb = oracle::mms_problem(0.05, 0.01, 0.5, 30.0);
    const Trajectory u = solve_linear(pb, oracle::mms_forcing_field(pb, false));
    for (std::size_t n = 0; n < pb.grid.time_levels(); ++n) {
        CHECK(u.values(n, 0) == 0.0);
        if (n > 0) CHECK(u.values(n, pb.grid.n_space) == 0.0);
    }
}

TEST_CASE("operator transpose is the adjoint") {
    const Problem pb = coarse_canonical();
    const auto op = operator_for(pb.coefficients, pb.grid);
    const std::size_t n = op->interior_size();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    std::vector<double> a(n), b(n), ma(n), mtb(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = z(rng);
        b[i] = z(rng);
    }
    op->apply(a, ma);
    op->apply_transpose(b, mtb);
    const double lhs = std::inner_product(b.begin(), b.end(), ma.begin(), 0.0);
    const double rhs = std::inner_product(a.begin(), a.end(), mtb.begin(), 0.0);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("factorizations are cached per grid") {
    const Problem pb = coarse_canonical();
    CHECK(operator_for(pb.coefficients, pb.grid) == operator_for(pb.coefficients, pb.grid));
    Coefficients other = pb.coefficients;
    other.beta = 2.0;
    CHECK(operator_for(other, pb.grid) != operator_for(pb.coefficients, pb.grid));
    CHECK(operator_for(pb.coefficients, pb.grid)->reciprocal_condition() > 0.0);
}

TEST_CASE("explicit flux sources reproduce the nonlinear solve") {
    ProblemSpec s = canonical_problem_spec();
    s.h = 0.05;
    s.tau = 2e-3;
    s.u0 = DataSpec::named("gaussian", {{"scale", 0.5}, {"center", 6.0}, {"width", 1.0}});
    const Problem pb = build_problem(s);
    const Trajectory nl = solve_nonlinear(pb, Forcing{});
    Forcing f;
    f.step_source = explicit_flux_sources(nl.values, pb.coefficients.nonlinearity_power, pb.grid.h);
    const Trajectory lin = solve_linear(pb, f);
    CHECK(max_abs_diff(lin.values, nl.values) <= 1e-12 * nl.values.max_abs());
}

TEST_CASE("energy residual requires homogeneous data") {
    const Problem pb = oracle::mms_problem(0.1, 0.02, 0.2, 30.0);
    const Forcing f = oracle::mms_forcing_field(pb, false);
    CHECK_THROWS_AS(energy_residual(solve_linear(pb, f), f), PreconditionError);
}

TEST_CASE("energy residual agrees with a direct sum") {
    const Problem pb = coarse_canonical();
    TimeSignal f0 = TimeSignal::zeros(pb.grid);
    for (std::size_t n = 0; n < f0.size(); ++n) f0.samples[n] = std::cos(4.0 * pb.grid.t(n));
    const Forcing f = Forcing::from_pair(f0, pb.g);
    const Trajectory u = solve_linear(pb, f);
    const double r = energy_residual(u, f);
    CHECK(std::max(r, 0.0) == doctest::Approx(oracle::energy_gap(u, f.nodal_total(pb.grid))).epsilon(1e-12));
    CHECK(r <= 10.0 * (pb.grid.h * pb.grid.h + pb.grid.tau * pb.grid.tau) * u.sup_l2() * u.sup_l2());
}

TEST_CASE("well-posedness ratios are deterministic and finite") {
    const Problem pb = coarse_canonical();
    const RatioStatistics a = wellposedness_ratio(pb, 4, 9);
    const RatioStatistics b = wellposedness_ratio(pb, 4, 9);
    CHECK(a.values == b.values);
    CHECK(std::isfinite(a.max));
    CHECK(a.max > 0.0);
    CHECK(a.min <= a.median);
    CHECK(a.median <= a.max);
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 5) == derive_seed(1, 5));
}

TEST_CASE("forcing from a pair matches the product at the nodes") {
    const Problem pb = coarse_canonical();
    TimeSignal f0 = TimeSignal::zeros(pb.grid);
    for (std::size_t n = 0; n < f0.size(); ++n) f0.samples[n] = 1.0 + pb.grid.t(n);
    const Forcing f = Forcing::from_pair(f0, pb.g);
    CHECK(f.f1(3, 7) == doctest::Approx(f0.samples[3] * std::exp(-pb.grid.x(7))));
    CHECK_FALSE(f.has_f2());
    const Forcing neg = f.negated();
    CHECK(neg.f1(3, 7) == -f.f1(3, 7));
}
