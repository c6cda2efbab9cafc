#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

std::array<double, 6> poly_exp_derivatives(std::vector<double> coeffs, double rate, double x) {
    std::array<double, 6> out{};
    for (int k = 0; k < 6; ++k) {
        double p = 0.0;
        for (std::size_t i = coeffs.size(); i-- > 0;) p = p * x + coeffs[i];
        out[static_cast<std::size_t>(k)] = p * std::exp(-rate * x);
        std::vector<double> next(coeffs.size(), 0.0);
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            next[i] -= rate * coeffs[i];
            if (i > 0) next[i - 1] += static_cast<double>(i) * coeffs[i];
        }
        coeffs = next;
    }
    return out;
}

double mms_u(double t, double x) { return std::exp(-t) * (x + x * x) * std::exp(-x); }

double mms_forcing(double t, double x, const kawa::Coefficients& c, bool nonlinear) {
    const auto d = poly_exp_derivatives({0.0, 1.0, 1.0}, 1.0, x);
    const double e = std::exp(-t);
    double f = -e * d[0] + c.alpha * e * d[1] + c.beta * e * d[3] - e * d[5];
    if (nonlinear) f += std::pow(e * d[0], c.nonlinearity_power) * e * d[1];
    return f;
}

kawa::Problem mms_problem(double h, double tau, double T, double R) {
    kawa::ProblemSpec s;
    s.coefficients = {1.0, 1.0, 1};
    s.domain = {kawa::DomainKind::RightHalfLine, R, 0.0};
    s.h = h;
    s.tau = tau;
    s.T = T;
    s.u0 = kawa::DataSpec::named("mms", {{"scale", 1.0}});
    s.mu = kawa::DataSpec::named("zero");
    s.nu = kawa::DataSpec::named("exp_decay", {{"offset", 0.0}, {"scale", 1.0}, {"rate", 1.0}});
    s.phi = kawa::DataSpec::named("zero");
    return kawa::build_problem(s);
}

kawa::Forcing mms_forcing_field(const kawa::Problem& pb, bool nonlinear) {
    kawa::Forcing f;
    f.f1 = kawa::Field(pb.grid.time_levels(), pb.grid.space_nodes());
    for (std::size_t n = 0; n < pb.grid.time_levels(); ++n) {
        for (std::size_t j = 0; j < pb.grid.space_nodes(); ++j) {
            f.f1(n, j) = mms_forcing(pb.grid.t(n), pb.grid.x(j), pb.coefficients, nonlinear);
        }
    }
    f.description = "manufactured";
    return f;
}

double mms_error(const kawa::Trajectory& traj) {
    double e = 0.0;
    for (std::size_t n = 0; n < traj.grid.time_levels(); ++n) {
        for (std::size_t j = 0; j < traj.grid.space_nodes(); ++j) {
            e = std::max(e, std::abs(traj.values(n, j) - mms_u(traj.grid.t(n), traj.grid.x(j))));
        }
    }
    return e;
}

double mms_observation(double t) { return (24.0 / 32.0 + 120.0 / 64.0) * std::exp(-t); }

double simpson(const std::function<double(double)>& f, double a, double b, std::size_t panels) {
    if (panels % 2) ++panels;
    const double h = (b - a) / static_cast<double>(panels);
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    return s * h / 3.0;
}

double c0_cubic_exp(double alpha, double beta, double g0, double g_scale, double g_rate, double R) {
    auto norm_of_derivative = [R](int k) {
        return std::sqrt(simpson(
            [k](double x) {
                const double v = poly_exp_derivatives({0.0, 0.0, 0.0, 1.0}, 1.0, x)[static_cast<std::size_t>(k)];
                return v * v;
            },
            0.0, R, 200000));
    };
    const double g_l2 = std::sqrt(simpson(
        [&](double x) { return g_scale * g_scale * std::exp(-2.0 * g_rate * x); }, 0.0, R, 200000));
    return (2.0 / g0) * g_l2 *
           (std::abs(alpha) * norm_of_derivative(1) + std::abs(beta) * norm_of_derivative(3) + norm_of_derivative(5));
}

double rectangle_l2(const kawa::Field& f, double dt, double dx) {
    double s = 0.0;
    for (double v : f.data()) s += v * v;
    return std::sqrt(dt * dx * s);
}

double energy_gap(const kawa::Trajectory& traj, const kawa::Field& f) {
    const auto& g = traj.grid;
    auto integral = [&](auto&& fn) {
        double s = 0.0;
        for (std::size_t j = 0; j < g.space_nodes(); ++j) {
            const double w = (j == 0 || j + 1 == g.space_nodes()) ? 0.5 : 1.0;
            s += w * fn(j);
        }
        return s * g.h;
    };
    double work = 0.0;
    double worst = 0.0;
    for (std::size_t n = 1; n < g.time_levels(); ++n) {
        const double a = integral([&](std::size_t j) { return f(n - 1, j) * traj.values(n - 1, j); });
        const double b = integral([&](std::size_t j) { return f(n, j) * traj.values(n, j); });
        work += g.tau * (a + b);
        const double energy = integral([&](std::size_t j) { return traj.values(n, j) * traj.values(n, j); });
        worst = std::max(worst, energy - work);
    }
    return worst;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace oracle
