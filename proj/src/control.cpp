#include "kawa/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kawa/error.hpp"

namespace kawa {

namespace {

constexpr double kTiny = 1e-300;
// Relative Picard update below which iterates only differ by round-off.
constexpr double kRoundoffFloor = 1e6 * std::numeric_limits<double>::epsilon();

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

TimeSignal signal(std::vector<double> samples, double dt) {
    TimeSignal s;
    s.samples = std::move(samples);
    s.dt = dt;
    return s;
}

/// phi'(0) from the analytic derivative when present, else a one-sided difference.
double initial_slope(const TimeSignal& phi) {
    if (!phi.derivative.empty()) return phi.derivative.front();
    return finite_difference(phi.samples, phi.dt).front();
}

std::vector<double> derivative_samples(const TimeSignal& phi) {
    if (!phi.derivative.empty()) return phi.derivative;
    return finite_difference(phi.samples, phi.dt);
}

/// Shared per-problem state of the Picard iteration.
struct Engine {
    std::shared_ptr<const KawaharaOperator> op;
    DiscreteObservation obs;
    std::vector<double> g1;  ///< discrete int g omega per time level
    ContractionConstants constants;

    explicit Engine(const Problem& pb)
        : op(operator_for(pb.coefficients, pb.grid)),
          obs(*op, pb.omega),
          g1(obs.g1(pb.g.grid_samples)),
          constants(compute_constants(pb)) {
        g1_trace(pb.g, pb.omega, pb.grid, pb.g0);
        for (double v : g1) {
            if (!(std::abs(v) > 0.0)) throw HypothesisError("g1 vanishes on the grid");
        }
    }
};

double weighted_norm(std::span<const double> diff, double gamma, double dt, double p) {
    std::vector<double> w(diff.size());
    for (std::size_t n = 0; n < w.size(); ++n) w[n] = std::exp(-gamma * dt * static_cast<double>(n)) * diff[n];
    return lp_time_norm(signal(std::move(w), dt), p);
}

/// Picard iteration for f0 = (d - r[S(0,0,0,f0 g)]) / g1, tracking target
/// (nodal values, already starting at 0) with trapezoid-consistent derivative d.
ControlResult gamma_iteration(const Problem& pb, const Engine& engine, const std::vector<double>& target,
                              const std::vector<double>& d, const PicardOptions& options) {
    const SpaceTimeGrid& grid = pb.grid;
    const std::size_t levels = grid.time_levels();
    const std::vector<double> zero_u0(grid.space_nodes(), 0.0);
    const TimeSignal zero = TimeSignal::zeros(grid);

    ControlResult res;
    res.constants = engine.constants;
    res.scale = max_abs(target) > 0.0 ? max_abs(target) : 1.0;
    res.gamma_target_derivative = signal(d, grid.tau);

    std::vector<double> f(levels, 0.0);
    if (options.initial) {
        if (options.initial->size() != levels) throw DimensionError("initial control length mismatch");
        f = options.initial->samples;
    }
    const double gamma = options.gamma ? *options.gamma : engine.constants.gamma_star;
    double kappa = 0.0;
    double first_weighted = 0.0;

    for (int k = 1; k <= options.max_iter; ++k) {
        Trajectory u = solve_linear(pb, zero_u0, zero, zero, Forcing::from_pair(signal(f, grid.tau), pb.g));
        const auto s = engine.obs.state_rates(u);
        std::vector<double> next(levels), diff(levels);
        for (std::size_t n = 0; n < levels; ++n) {
            next[n] = (d[n] - s[n]) / engine.g1[n];
            diff[n] = next[n] - f[n];
        }
        const double update = max_abs(diff);
        const double weighted = weighted_norm(diff, gamma, grid.tau, pb.p);
        if (k == 1) first_weighted = weighted;
        if (!res.weighted_updates.empty()) {
            const double prev = res.weighted_updates.back();
            // Ratios are meaningful only above the round-off floor.
            if (prev > 1e-11 * std::max(first_weighted, kTiny) && weighted > 1e-12 * first_weighted) {
                const double ratio = weighted / prev;
                res.contraction_ratios.push_back(ratio);
                kappa = std::max(kappa, ratio);
            }
        }
        res.update_norms.push_back(update);
        res.weighted_updates.push_back(weighted);
        res.iterations = k;

        if (!std::isfinite(update)) throw IterationError("Picard iteration produced non-finite values", kappa);
        if (update <= std::max(options.tol, kRoundoffFloor) * max_abs(f) || update == 0.0) {
            res.f0 = signal(f, grid.tau);
            res.q = observe(u, pb.omega);
            double r = 0.0;
            for (std::size_t n = 0; n < levels; ++n) r = std::max(r, std::abs(res.q.samples[n] - target[n]));
            res.residual = r;
            res.trajectory = std::move(u);
            res.converged = true;
            res.constants.kappa_measured = kappa;
            return res;
        }
        f = std::move(next);
    }
    std::ostringstream os;
    os << "Picard iteration did not converge in " << options.max_iter << " iterations (measured contraction "
       << kappa << ")";
    throw IterationError(os.str(), kappa);
}

/// Linear control driven by an already sign-correct forcing for the free response.
ControlResult linear_control(const Problem& pb, const Engine& engine, const Forcing& free_forcing,
                             const PicardOptions& options) {
    const SpaceTimeGrid& grid = pb.grid;
    const std::size_t levels = grid.time_levels();
    Trajectory v1 = solve_linear(pb, free_forcing);
    const TimeSignal q1 = observe(v1, pb.omega);

    std::vector<double> target(levels);
    for (std::size_t n = 0; n < levels; ++n) target[n] = pb.phi.samples[n] - q1.samples[n];
    const double gap = target[0];
    for (double& v : target) v -= gap;

    double r0 = engine.obs.state_rates(v1).front();
    const Field F = free_forcing.nodal_total(grid);
    if (!F.empty()) r0 += engine.obs.interior_dot(F.row(0));
    if (!free_forcing.step_source.empty()) r0 += engine.obs.interior_dot(free_forcing.step_source.row(0));
    const auto d = trapezoid_consistent_derivative(target, grid.tau, initial_slope(pb.phi) - r0);

    ControlResult res = gamma_iteration(pb, engine, target, d, options);
    Trajectory u = v1;
    u.values += res.trajectory.values;
    u.forcing_record = "f0 g + (" + free_forcing.description + ")";
    res.q = observe(u, pb.omega);
    double r = 0.0;
    for (std::size_t n = 0; n < levels; ++n) r = std::max(r, std::abs(res.q.samples[n] - pb.phi.samples[n]));
    res.residual = r;
    res.scale = pb.phi.max_abs() > 0.0 ? pb.phi.max_abs() : 1.0;
    res.trajectory = std::move(u);
    return res;
}

}  // namespace

G1Trace g1_trace(const SourceShape& g, const Weight& omega, const SpaceTimeGrid& grid, double g0) {
    const Field& gs = g.grid_samples;
    if (gs.rows() != grid.time_levels() || gs.cols() != grid.space_nodes()) {
        throw DimensionError("g samples do not match the grid");
    }
    const Weight bound = omega.is_bound() ? omega : omega.bound_to(grid);
    G1Trace out;
    out.g1.dt = grid.tau;
    out.g1.samples.resize(gs.rows());
    for (std::size_t n = 0; n < gs.rows(); ++n) out.g1.samples[n] = trapezoid_product(gs.row(n), bound.samples(0), grid.h);
    const auto [lo, hi] = std::minmax_element(out.g1.samples.begin(), out.g1.samples.end());
    if (*lo < 0.0 && *hi > 0.0) throw HypothesisError("g1 changes sign");
    out.min_abs = std::min(std::abs(*lo), std::abs(*hi));
    if (out.min_abs < g0) {
        if (g0 - out.min_abs > kTraceTolerance) {
            std::ostringstream os;
            os << "min |g1| = " << out.min_abs << " is below g0 = " << g0;
            throw HypothesisError(os.str());
        }
        const double sign = *hi > 0.0 ? 1.0 : -1.0;
        for (double& v : out.g1.samples) {
            if (std::abs(v) < g0) v = sign * g0;
        }
        out.min_abs = g0;
        out.clamped = true;
    }
    return out;
}

ContractionConstants compute_constants(const Problem& pb) {
    if (!(pb.g0 > 0.0)) throw DomainError("g0 must be positive");
    ContractionConstants c;
    c.g0 = pb.g0;
    const double h = pb.grid.h;
    for (std::size_t n = 0; n < pb.g.grid_samples.rows(); ++n) {
        c.g_sup_l2 = std::max(c.g_sup_l2, l2_norm(pb.g.grid_samples.row(n), h));
    }
    const Weight w = pb.omega.is_bound() ? pb.omega : pb.omega.bound_to(pb.grid);
    c.weight_combination = std::abs(pb.coefficients.alpha) * l2_norm(w.samples(1), h) +
                           std::abs(pb.coefficients.beta) * l2_norm(w.samples(3), h) + l2_norm(w.samples(5), h);
    c.c0 = 2.0 / pb.g0 * c.g_sup_l2 * c.weight_combination;
    const double T = pb.grid.T;
    if (std::isinf(pb.p)) {
        c.gamma_star = 2.0 * c.c0;
    } else if (pb.p <= 1.0) {
        throw DomainError("p must exceed 1");
    } else {
        const double pp = pb.p / (pb.p - 1.0);
        c.gamma_star = std::pow(2.0 * c.c0 * std::pow(T, 1.0 / pb.p), pp) / pp;
    }
    return c;
}

TimeSignal apply_A(const TimeSignal& f0, const Problem& pb) {
    const SpaceTimeGrid& grid = pb.grid;
    if (f0.size() != grid.time_levels()) throw DimensionError("f0 length does not match the grid");
    const Engine engine(pb);
    const std::vector<double> zero_u0(grid.space_nodes(), 0.0);
    const TimeSignal zero = TimeSignal::zeros(grid);
    const Trajectory u = solve_linear(pb, zero_u0, zero, zero, Forcing::from_pair(f0, pb.g));
    const auto s = engine.obs.state_rates(u);
    const auto d = trapezoid_consistent_derivative(pb.phi.samples, grid.tau, initial_slope(pb.phi));
    TimeSignal out = signal(std::vector<double>(grid.time_levels()), grid.tau);
    for (std::size_t n = 0; n < out.size(); ++n) out.samples[n] = (d[n] - s[n]) / engine.g1[n];
    return out;
}

ControlResult solve_gamma(const TimeSignal& phi, const Problem& pb, const PicardOptions& options) {
    if (phi.size() != pb.grid.time_levels()) throw DimensionError("phi length does not match the grid");
    if (std::abs(phi.samples.front()) > kTraceTolerance * std::max(1.0, phi.max_abs())) {
        throw PreconditionError("Gamma requires phi(0) = 0");
    }
    const Engine engine(pb);
    const auto d = trapezoid_consistent_derivative(phi.samples, pb.grid.tau, initial_slope(phi));
    return gamma_iteration(pb, engine, phi.samples, d, options);
}

ControlResult control_linear(const Problem& pb, const Forcing* f2, const PicardOptions& options) {
    require_valid(validate_problem(pb));
    const Engine engine(pb);
    Forcing free = f2 ? f2->negated() : Forcing{};
    return linear_control(pb, engine, free, options);
}

ControlResult control_nonlinear(const Problem& pb, const NonlinearOptions& options) {
    require_valid(validate_problem(pb));
    const Engine engine(pb);
    const SpaceTimeGrid& grid = pb.grid;
    const int power = pb.coefficients.nonlinearity_power;

    const double C = options.solution_constant
                         ? *options.solution_constant
                         : wellposedness_ratio(pb, options.ensemble_size, options.seed).max;
    const double rootT = std::sqrt(grid.T) + 1.0;
    const double c1 = data_size(pb);
    const double threshold = C > 0.0 ? 1.0 / (8.0 * C * C * rootT) : kInfinity;

    Field v(grid.time_levels(), grid.space_nodes());
    PicardOptions inner{options.inner_tol, options.inner_max_iter, std::nullopt, std::nullopt};
    std::vector<double> diffs, ratios;
    ControlResult last;
    bool converged = false;
    int k = 0;
    while (k < options.max_iter) {
        ++k;
        Forcing free;
        free.step_source = explicit_flux_sources(v, power, grid.h);
        free.description = "explicit flux of the previous iterate";
        last = linear_control(pb, engine, free, inner);
        inner.initial = last.f0;
        const Field& u = last.trajectory.values;
        const double diff = max_abs_diff(u, v) / std::max(u.max_abs(), kTiny);
        if (!diffs.empty() && diffs.back() > 0.0) ratios.push_back(diff / diffs.back());
        diffs.push_back(diff);
        v = u;
        if (!std::isfinite(diff)) break;
        if (diff <= options.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        const double rho = ratios.empty() ? 0.0 : ratios.back();
        std::ostringstream os;
        os << "Theta iteration did not converge in " << k << " sweeps (last ratio " << rho << ")";
        throw IterationError(os.str(), rho);
    }

    ControlResult res = std::move(last);
    res.outer_differences = std::move(diffs);
    res.outer_ratios = std::move(ratios);
    res.outer_iterations = k;
    res.solution_constant = C;
    res.smallness_c1 = c1;
    res.smallness_threshold = threshold;
    res.ball_radius = C > 0.0 ? 1.0 / (4.0 * C * rootT) : kInfinity;
    if (c1 <= threshold) {
        res.smallness = Verdict::Pass;
    } else {
        res.smallness = Verdict::Advisory;
        std::ostringstream os;
        os << "data size " << c1 << " exceeds the sufficient smallness threshold " << threshold;
        res.warnings.push_back(os.str());
    }

    Trajectory closed = solve_nonlinear(pb, Forcing::from_pair(res.f0, pb.g));
    const TimeSignal q = observe(closed, pb.omega);
    double r = 0.0;
    for (std::size_t n = 0; n < q.size(); ++n) r = std::max(r, std::abs(q.samples[n] - pb.phi.samples[n]));
    res.closed_loop_residual = r;
    res.q = q;
    res.trajectory = std::move(closed);
    return res;
}

double data_size(const Problem& pb) {
    return l2_norm(pb.u0, pb.grid.h) + fractional_sobolev_norm(pb.mu, 0.4) + fractional_sobolev_norm(pb.nu, 0.2) +
           lp_time_norm(signal(derivative_samples(pb.phi), pb.grid.tau), 2.0);
}

BoundCheck refined_bound_check(const ControlResult& result, const Problem& pb) {
    BoundCheck check;
    check.name = "refined_bound";
    const double c0T = result.constants.c0 * pb.grid.T;
    const double limit = std::isinf(pb.p) ? 0.5 : 0.5 * std::pow(pb.p, 1.0 / pb.p);
    std::ostringstream os;
    os << "c0 T = " << c0T << ", hypothesis limit " << limit;
    check.detail = os.str();
    if (c0T > limit) {
        check.verdict = Verdict::Skipped;
        return check;
    }
    check.lhs = lp_time_norm(result.f0, pb.p);
    check.rhs = 2.0 / pb.g0 * lp_time_norm(result.gamma_target_derivative, pb.p);
    check.constant = check.rhs > 0.0 ? check.lhs / check.rhs : 0.0;
    check.verdict = check.lhs <= check.rhs * (1.0 + 1e-2) ? Verdict::Pass : Verdict::Fail;
    return check;
}

double endpoint_tolerance(std::span<const double> u, const SpaceTimeGrid& grid) {
    return 1e-8 * (1.0 + l2_norm(u, grid.h));
}

BoundCheck mass_control_check(const Problem& pb, std::span<const double> uT, const ControlResult& result) {
    const SpaceTimeGrid& grid = pb.grid;
    if (uT.size() != grid.space_nodes()) throw DimensionError("uT does not match the grid");
    if (pb.mu.max_abs() != 0.0 || pb.nu.max_abs() != 0.0) {
        throw PreconditionError("mass control requires homogeneous boundary data");
    }
    const double mass0 = trapezoid_product(pb.u0, pb.omega.samples(0), grid.h);
    const double massT = trapezoid_product(uT, pb.omega.samples(0), grid.h);
    const double tol = endpoint_tolerance(uT, grid);
    if (std::abs(pb.phi.samples.front() - mass0) > endpoint_tolerance(pb.u0, grid) ||
        std::abs(pb.phi.samples.back() - massT) > tol) {
        throw PreconditionError("phi does not match the endpoint masses");
    }
    BoundCheck check;
    check.name = "mass_control";
    check.lhs = std::abs(mass_functional(result.trajectory, pb.omega, grid.n_time) - massT);
    check.rhs = result.residual + tol;
    check.constant = check.rhs > 0.0 ? check.lhs / check.rhs : 0.0;
    check.verdict = check.lhs <= check.rhs ? Verdict::Pass : Verdict::Fail;
    return check;
}

}  // namespace kawa
