#include "kawa/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kawa/error.hpp"
#include "kawa/observation.hpp"

namespace kawa {

namespace {

std::vector<double> scaled(std::span<const double> v, double factor) {
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) x *= factor;
    return out;
}

TimeSignal scaled_signal(const TimeSignal& s, double factor, double dt, double derivative_factor) {
    TimeSignal out;
    out.samples = scaled(s.samples, factor);
    out.dt = dt;
    out.p_exponent = s.p_exponent;
    if (!s.derivative.empty()) out.derivative = scaled(s.derivative, factor * derivative_factor);
    return out;
}

/// Lagrange weights on the four nodes base-1..base+2 for offset s in [0,1].
std::array<double, 4> lagrange4(double s) {
    return {-s * (s - 1.0) * (s - 2.0) / 6.0, (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0, (s + 1.0) * s * (s - 1.0) / 6.0};
}

/// Stencil start and weights for a coordinate on n+1 nodes. Exact node hits
/// return a unit weight so aligned resampling reproduces samples bit for bit.
std::pair<std::size_t, std::array<double, 4>> stencil(double pos, std::size_t n) {
    const double r = std::round(pos);
    if (std::abs(pos - r) <= 1e-9 * std::max(1.0, std::abs(pos))) {
        const auto k = static_cast<std::size_t>(r);
        const std::size_t start = std::clamp<std::size_t>(k, 1, n - 2) - 1;
        std::array<double, 4> w{};
        w[k - start] = 1.0;
        return {start, w};
    }
    auto i = static_cast<std::size_t>(std::floor(pos));
    i = std::clamp<std::size_t>(i, 1, n - 2);
    return {i - 1, lagrange4(pos - static_cast<double>(i))};
}

}  // namespace

ScaledProblem rescale_problem(const Problem& pb, double delta, const ScalingExponents& exponents) {
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("scaling parameter must lie in (0, 1]");
    ScaledProblem sp;
    sp.delta = delta;
    sp.exponents = exponents;
    sp.base = pb;
    sp.nonlinear_factor = std::pow(delta, 4.0 - 4.0 * pb.coefficients.nonlinearity_power);
    sp.control_factor = std::pow(delta, 8.0);
    if (delta == 1.0) {
        sp.scaled = pb;
        return sp;
    }
    const double d5 = std::pow(delta, 5.0);

    ProblemSpec spec = pb.spec;
    spec.coefficients.alpha = pb.coefficients.alpha * std::pow(delta, 4.0);
    spec.coefficients.beta = pb.coefficients.beta * delta * delta;
    spec.domain.truncation_radius = pb.domain.truncation_radius / delta;
    spec.domain.left_cutoff = pb.domain.left_cutoff / delta;
    spec.h = pb.grid.h / delta;
    spec.tau = pb.grid.tau / d5;
    spec.T = pb.grid.T / d5;
    spec.u0 = DataSpec{};
    spec.u0.samples = scaled(pb.u0, std::pow(delta, 4.0));
    spec.mu = DataSpec{};
    spec.mu.samples = scaled(pb.mu.samples, std::pow(delta, 4.0));
    spec.nu = DataSpec{};
    spec.nu.samples = scaled(pb.nu.samples, std::pow(delta, exponents.nu));
    spec.phi = DataSpec{};
    spec.phi.samples = scaled(pb.phi.samples, std::pow(delta, exponents.phi));
    spec.g = DataSpec{};
    spec.g.samples2d = pb.g.grid_samples;
    spec.g.samples2d *= delta;
    spec.omega.params["dilation"] = pb.spec.omega.param("dilation", 1.0) * delta;

    sp.scaled = build_problem(spec);
    // Keep exact derivative samples: d/dt' = delta^5 d/dt.
    sp.scaled.mu = scaled_signal(pb.mu, std::pow(delta, 4.0), spec.tau, d5);
    sp.scaled.nu = scaled_signal(pb.nu, std::pow(delta, exponents.nu), spec.tau, d5);
    sp.scaled.phi = scaled_signal(pb.phi, std::pow(delta, exponents.phi), spec.tau, d5);
    if (pb.g.eval) {
        const auto g = pb.g.eval;
        sp.scaled.g.eval = [g, delta, d5](double t, double x) { return delta * g(d5 * t, delta * x); };
    }
    return sp;
}

Trajectory scale_trajectory(const Trajectory& base, const ScaledProblem& sp) {
    if (base.values.rows() != sp.scaled.grid.time_levels() || base.values.cols() != sp.scaled.grid.space_nodes()) {
        throw DimensionError("trajectory does not live on the base grid of the scaled problem");
    }
    Trajectory t = base;
    t.grid = sp.scaled.grid;
    t.domain = sp.scaled.domain;
    t.coefficients = sp.scaled.coefficients;
    t.values *= std::pow(sp.delta, 4.0);
    t.mu = sp.scaled.mu;
    t.nu = sp.scaled.nu;
    t.forcing_record = "scaled: " + base.forcing_record;
    return t;
}

TimeSignal scale_control(const TimeSignal& f0, const ScaledProblem& sp) {
    return scaled_signal(f0, sp.control_factor, sp.scaled.grid.tau, std::pow(sp.delta, 5.0));
}

double interpolate_cubic(const Trajectory& traj, double t, double x) {
    const SpaceTimeGrid& g = traj.grid;
    const double pt = t / g.tau;
    const double px = (x - g.x_left) / g.h;
    const double slack = 1e-9;
    if (pt < -slack || pt > static_cast<double>(g.n_time) + slack || px < -slack ||
        px > static_cast<double>(g.n_space) + slack) {
        throw DomainError("interpolation point outside the grid");
    }
    if (g.n_time < 3 || g.n_space < 3) throw DimensionError("cubic interpolation needs four nodes per axis");
    const auto [ti, tw] = stencil(std::clamp(pt, 0.0, static_cast<double>(g.n_time)), g.n_time);
    const auto [xi, xw] = stencil(std::clamp(px, 0.0, static_cast<double>(g.n_space)), g.n_space);
    double s = 0.0;
    for (int a = 0; a < 4; ++a) {
        if (tw[a] == 0.0) continue;
        double row = 0.0;
        for (int b = 0; b < 4; ++b) {
            if (xw[b] != 0.0) row += xw[b] * traj.values(ti + a, xi + b);
        }
        s += tw[a] * row;
    }
    return s;
}

double discrete_pde_residual(const Trajectory& traj, const Coefficients& c, double nonlinear_factor,
                             const TimeSignal& f0, const SourceShape& g) {
    const SpaceTimeGrid& grid = traj.grid;
    const Field& U = traj.values;
    const std::size_t N = grid.n_space;
    const double h = grid.h;
    const double tau = grid.tau;
    const double h3 = h * h * h;
    const double h5 = h3 * h * h;
    const int p = c.nonlinearity_power;
    const bool nonlinear = traj.nonlinear;
    double worst = 0.0;
    double size = 0.0;
    for (std::size_t n = 1; n < grid.n_time; ++n) {
        for (std::size_t j = 3; j + 3 <= N; ++j) {
            auto u = [&](long o) { return U(n, static_cast<std::size_t>(static_cast<long>(j) + o)); };
            const double ut = (U(n + 1, j) - U(n - 1, j)) / (2.0 * tau);
            const double d1 = (u(1) - u(-1)) / (2.0 * h);
            const double d3 = (-0.5 * u(-2) + u(-1) - u(1) + 0.5 * u(2)) / h3;
            const double d5 = (-0.5 * u(-3) + 2.0 * u(-2) - 2.5 * u(-1) + 2.5 * u(1) - 2.0 * u(2) + 0.5 * u(3)) / h5;
            const double nl = nonlinear ? nonlinear_factor * std::pow(u(0), p) * d1 : 0.0;
            const double f = f0.samples.empty() ? 0.0 : f0.samples[n] * g.grid_samples(n, j);
            const double terms[] = {ut, c.alpha * d1, c.beta * d3, d5, nl, f};
            const double r = ut + c.alpha * d1 + c.beta * d3 - d5 + nl - f;
            worst = std::max(worst, std::abs(r));
            for (double v : terms) size = std::max(size, std::abs(v));
        }
    }
    return size > 0.0 ? worst / size : 0.0;
}

ScalingResidual scaling_residual(const Problem& pb, double delta, const std::optional<TimeSignal>& f0,
                                 const ScalingExponents& exponents) {
    const ScaledProblem sp = rescale_problem(pb, delta, exponents);
    const TimeSignal control = f0 ? *f0 : TimeSignal::zeros(pb.grid);
    const Trajectory base = solve_nonlinear(pb, Forcing::from_pair(control, pb.g));

    // u_delta(t', x') = delta^4 u(delta^5 t', delta x') evaluated on the scaled grid.
    const SpaceTimeGrid& sg = sp.scaled.grid;
    const double d4 = std::pow(delta, 4.0);
    const double d5 = std::pow(delta, 5.0);
    Trajectory ud = scale_trajectory(base, sp);
    const Field aligned = ud.values;
    double interp = 0.0;
    for (std::size_t n = 0; n < sg.time_levels(); ++n) {
        for (std::size_t j = 0; j < sg.space_nodes(); ++j) {
            const double v = d4 * interpolate_cubic(base, d5 * sg.t(n), delta * sg.x(j));
            interp = std::max(interp, std::abs(v - aligned(n, j)));
            ud.values(n, j) = v;
        }
    }

    ScalingResidual out;
    const double scale = std::max(aligned.max_abs(), 1e-300);
    out.interpolation_error = aligned.max_abs() > 0.0 ? interp / scale : 0.0;
    out.pde_residual = discrete_pde_residual(ud, sp.scaled.coefficients, sp.nonlinear_factor,
                                             scale_control(control, sp), sp.scaled.g);
    out.base_residual = discrete_pde_residual(base, pb.coefficients, 1.0, control, pb.g);
    return out;
}

ObservationEquivalence observation_equivalence(const Problem& pb, const TimeSignal& f0, const Trajectory& u,
                                               double delta, double tol, const ScalingExponents& exponents) {
    (void)f0;
    const ScaledProblem sp = rescale_problem(pb, delta, exponents);
    auto relative = [](const TimeSignal& q, const TimeSignal& phi) {
        double r = 0.0;
        for (std::size_t n = 0; n < q.size(); ++n) r = std::max(r, std::abs(q.samples[n] - phi.samples[n]));
        const double scale = phi.max_abs() > 0.0 ? phi.max_abs() : 1.0;
        return r / scale;
    };
    ObservationEquivalence eq;
    eq.base_residual = relative(observe(u, pb.omega), pb.phi);
    eq.scaled_residual = relative(observe(scale_trajectory(u, sp), sp.scaled.omega), sp.scaled.phi);
    eq.base_satisfied = eq.base_residual <= tol;
    eq.scaled_satisfied = eq.scaled_residual <= tol;
    eq.equivalent = eq.base_satisfied == eq.scaled_satisfied &&
                    std::abs(eq.base_residual - eq.scaled_residual) <= 1e-6 * std::max(tol, eq.base_residual);
    return eq;
}

MinimalTimeReport minimal_time(const Problem& pb, const MinimalTimeOptions& options) {
    MinimalTimeReport rep;
    const ContractionConstants c = compute_constants(pb);
    rep.c0 = c.c0;
    rep.c1 = data_size(pb);
    rep.solution_constant = options.solution_constant
                                ? *options.solution_constant
                                : wellposedness_ratio(pb, options.control.ensemble_size, options.control.seed).max;
    rep.delta_contraction = c.c0 > 0.0 ? std::pow(2.0 * c.c0, -0.2) : 1.0;
    rep.delta_contraction = std::min(rep.delta_contraction, 1.0);
    if (rep.c1 > 0.0 && rep.solution_constant > 0.0) {
        // delta^{1/2} c1 <= 1 / (8 C^2 (T^{1/2} + 1)) with unit scaled horizon.
        const double bound = 1.0 / (16.0 * rep.solution_constant * rep.solution_constant * rep.c1);
        rep.delta_smallness = bound * bound;
    }
    rep.delta0 = std::min(rep.delta_contraction, rep.delta_smallness);
    rep.smallness_binding = rep.delta_smallness < rep.delta_contraction;
    rep.T0 = std::pow(rep.delta0, 5.0);
    if (!options.certify) return rep;

    rep.certification_attempted = true;
    if (pb.coefficients.nonlinearity_power != 1) {
        rep.certification_note = "certification requires the quadratic nonlinearity (p = 1)";
        return rep;
    }
    const double tau0 = rep.T0 / static_cast<double>(options.certification_steps);
    const Problem base_T0 = with_grid(pb, pb.grid.h, tau0, rep.T0);
    const ScaledProblem sp = rescale_problem(base_T0, rep.delta0);
    NonlinearOptions opts = options.control;
    opts.solution_constant = rep.solution_constant;
    try {
        const ControlResult r = control_nonlinear(sp.scaled, opts);
        rep.certification_residual = r.closed_loop_residual / r.scale;
        rep.certified = r.residual <= std::max(opts.tol, 1e-9) * r.scale;
        std::ostringstream os;
        os << "Theta sweeps " << r.outer_iterations << ", scaled horizon " << sp.scaled.grid.T;
        rep.certification_note = os.str();
    } catch (const Error& e) {
        rep.certification_note = std::string("certification run failed: ") + e.what();
    }
    return rep;
}

}  // namespace kawa
