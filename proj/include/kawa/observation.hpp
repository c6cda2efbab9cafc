#pragma once

// The observation q(t) = int u(t,x) omega(x) dx, the identity for q'(t) and the
// mass functional [u(t)] with respect to d(eta) = omega dx.

#include <cstddef>
#include <span>
#include <vector>

#include "kawa/core_model.hpp"
#include "kawa/solver.hpp"
#include "kawa/verdict.hpp"

namespace kawa {

struct ObservationTrace {
    TimeSignal q;
    TimeSignal q_prime_formula;
    TimeSignal q_prime_numeric;
};

/// Composite-trapezoid quadrature of u(t_n, .) omega per time level. The weight
/// is sampled on the trajectory grid when unbound; a weight bound to another
/// grid throws DimensionError.
TimeSignal observe(const Trajectory& traj, const Weight& omega);

/// q'(t) = w'''(0) nu - w''''(0) mu + int f1 w - int f2 w' + int u (alpha w' + beta w''' - w''''')
/// with exact weight derivatives, plus a centered finite difference of q for
/// cross-checking. For nonlinear trajectories the flux term
/// int u^{p+1}/(p+1) w' is included.
ObservationTrace observation_derivative(const Trajectory& traj, const Forcing& forcing,
                                        const TimeSignal& mu, const TimeSignal& nu,
                                        const Weight& omega);

/// [u(t)] = int u(t_index, .) omega dx; identical arithmetic to observe().
double mass_functional(const Trajectory& traj, const Weight& omega, std::size_t t_index);

/// Both sides of the L^p bound on q' and the empirical constant.
BoundCheck qprime_norm_bound(const Trajectory& traj, const Forcing& forcing, const TimeSignal& mu,
                             const TimeSignal& nu, const Weight& omega, double p);

/// Second-order derivative of samples: centered inside, one-sided at the ends.
std::vector<double> finite_difference(std::span<const double> samples, double dt);

/// Node values d with tau/2 (d_n + d_{n+1}) = s_{n+1} - s_n exactly and
/// d_0 = initial_slope. Integrating d with the trapezoidal rule reproduces the
/// samples without quadrature error.
std::vector<double> trapezoid_consistent_derivative(std::span<const double> samples, double dt,
                                                    double initial_slope);

/// Observation rates consistent with the discrete scheme: for a solver
/// trajectory, q_{n+1} - q_n = tau/2 (r_n + r_{n+1}) + tau * (step rate)_n
/// holds to round-off, where r_n = state_rate_n + source_rate_n.
class DiscreteObservation {
public:
    DiscreteObservation(const KawaharaOperator& op, const Weight& omega);

    /// trapezoid-weight * omega over interior nodes, dotted with a nodal row.
    double interior_dot(std::span<const double> nodal_row) const;

    /// -w^T (M u + b_mu mu + b_nu nu) per time level.
    std::vector<double> state_rates(const Trajectory& traj) const;
    /// max_n of sum_i |a_i u_i| + |c_mu mu_n| + |c_nu nu_n|: the magnitude of the
    /// terms cancelling in state_rates, which sets its round-off floor.
    double state_rate_magnitude(const Trajectory& traj) const;
    /// w^T F_n per time level for a nodal source.
    std::vector<double> source_rates(const Field& nodal) const;
    /// w^T S_{n+1/2} per step for step-centered sources.
    std::vector<double> step_rates(const Field& step_source) const;

    /// Discrete analogue of int g(t,.) omega.
    std::vector<double> g1(const Field& g_samples) const;

    /// -M^T w: the discrete counterpart of alpha w' + beta w''' - w''''' (times h).
    std::span<const double> adjoint_weight() const { return adjoint_; }
    double mu_coefficient() const { return c_mu_; }
    double nu_coefficient() const { return c_nu_; }

private:
    std::vector<double> weight_;   ///< interior
    std::vector<double> adjoint_;  ///< interior
    double c_mu_ = 0.0;
    double c_nu_ = 0.0;
};

}  // namespace kawa
