#include <doctest.h>

#include <cmath>

#include "kawa/error.hpp"
#include "kawa/observation.hpp"
#include "kawa/problem_io.hpp"
#include "support/oracles.hpp"

using namespace kawa;

TEST_CASE("observation of the manufactured solution is second-order accurate") {
    std::vector<double> err;
    for (double k : {1.0, 2.0}) {
        const Problem pb = oracle::mms_problem(0.1 / k, 0.02 / k, 0.5, 40.0);
        const TimeSignal q = observe(solve_linear(pb, oracle::mms_forcing_field(pb, false)), pb.omega);
        double e = 0.0;
        for (std::size_t n = 0; n < q.size(); ++n) e = std::max(e, std::abs(q.samples[n] - oracle::mms_observation(pb.grid.t(n))));
        err.push_back(e);
    }
    CHECK(err[0] / err[1] > 3.5);
    CHECK(err[1] < 1e-3);
}

TEST_CASE("mass functional matches observe") {
    const Problem pb = oracle::mms_problem(0.1, 0.02, 0.2, 40.0);
    const Trajectory u = solve_linear(pb, oracle::mms_forcing_field(pb, false));
    const TimeSignal q = observe(u, pb.omega);
    CHECK(mass_functional(u, pb.omega, 4) == q.samples[4]);
}

TEST_CASE("a weight bound to another grid is rejected") {
    const Problem a = oracle::mms_problem(0.1, 0.02, 0.2, 40.0);
    const Problem b = oracle::mms_problem(0.05, 0.02, 0.2, 40.0);
    const Trajectory u = solve_linear(a, oracle::mms_forcing_field(a, false));
    CHECK_THROWS_AS(observe(u, b.omega), DimensionError);
    CHECK_NOTHROW(observe(u, preset_weight("cubic_exp")));
}

TEST_CASE("discrete observation identity holds to round-off") {
    ProblemSpec s = canonical_problem_spec();
    s.h = 0.05;
    s.tau = 2e-3;
    const Problem pb = build_problem(s);
    TimeSignal f0 = TimeSignal::zeros(pb.grid);
    for (std::size_t n = 0; n < f0.size(); ++n) f0.samples[n] = std::sin(3.0 * pb.grid.t(n));
    const Forcing f = Forcing::from_pair(f0, pb.g);
    const Trajectory u = solve_linear(pb, f);
    const TimeSignal q = observe(u, pb.omega);
    const DiscreteObservation obs(*operator_for(pb.coefficients, pb.grid), pb.omega);
    const auto r = obs.state_rates(u);
    const auto src = obs.source_rates(f.nodal_total(pb.grid));
    double worst = 0.0;
    for (std::size_t n = 0; n + 1 < q.size(); ++n) {
        const double lhs = q.samples[n + 1] - q.samples[n];
        const double rhs = 0.5 * pb.grid.tau * (r[n] + src[n] + r[n + 1] + src[n + 1]);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("q' formula carries the boundary terms") {
    const Problem pb = oracle::mms_problem(0.05, 0.01, 0.5, 40.0);
    const Forcing f = oracle::mms_forcing_field(pb, false);
    const Trajectory u = solve_linear(pb, f);
    const ObservationTrace tr = observation_derivative(u, f, u.mu, u.nu, pb.omega);
    for (std::size_t n = 0; n < tr.q.size(); n += 10) {
        CHECK(tr.q_prime_formula.samples[n] == doctest::Approx(-oracle::mms_observation(pb.grid.t(n))).epsilon(5e-3));
    }
}

TEST_CASE("a trajectory flagged with f2 needs f2") {
    const Problem pb = oracle::mms_problem(0.1, 0.02, 0.2, 40.0);
    Trajectory u = solve_linear(pb, oracle::mms_forcing_field(pb, false));
    u.forcing_has_f2 = true;
    CHECK_THROWS_AS(observation_derivative(u, Forcing{}, u.mu, u.nu, pb.omega), ContractError);
}

TEST_CASE("finite differences are exact on quadratics") {
    std::vector<double> s(11);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double t = 0.1 * static_cast<double>(i);
        s[i] = 3.0 * t * t - t + 2.0;
    }
    const auto d = finite_difference(s, 0.1);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(d[i] == doctest::Approx(6.0 * 0.1 * static_cast<double>(i) - 1.0));
}

TEST_CASE("trapezoid-consistent derivative integrates back to the samples") {
    std::vector<double> s(21);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(0.3 * static_cast<double>(i));
    const double dt = 0.05;
    const auto d = trapezoid_consistent_derivative(s, dt, 6.0);
    CHECK(d[0] == 6.0);
    double acc = s[0];
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        acc += 0.5 * dt * (d[i] + d[i + 1]);
        CHECK(acc == doctest::Approx(s[i + 1]).epsilon(1e-12));
    }
}

TEST_CASE("q' norm bound reports a finite constant") {
    const Problem pb = oracle::mms_problem(0.1, 0.02, 0.5, 40.0);
    const Forcing f = oracle::mms_forcing_field(pb, false);
    const Trajectory u = solve_linear(pb, f);
    const BoundCheck b = qprime_norm_bound(u, f, u.mu, u.nu, pb.omega, 2.0);
    CHECK(std::isfinite(b.constant));
    CHECK(b.lhs > 0.0);
    CHECK(b.rhs > 0.0);
}
