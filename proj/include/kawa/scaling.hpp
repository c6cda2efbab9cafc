#pragma once

// Scaling symmetry u_delta(t,x) = delta^4 u(delta^5 t, delta x) of the
// Kawahara equation and the minimal control time built on it.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kawa/control.hpp"
#include "kawa/core_model.hpp"
#include "kawa/solver.hpp"

namespace kawa {

struct ScalingExponents {
    double nu = 5.0;   ///< nu_delta = delta^nu nu(delta^5 t)
    double phi = 3.0;  ///< phi_delta = delta^phi phi(delta^5 t)
};

/// The scaled problem lives on the interval [0, R/delta] with spacing
/// h/delta, time step tau/delta^5 and horizon T/delta^5, so its nodes are the
/// images of the base nodes and the data are rescaled base samples.
struct ScaledProblem {
    double delta = 1.0;
    ScalingExponents exponents;
    Problem base;
    Problem scaled;
    /// Coefficient multiplying u^p u_x in the scaled equation (1 when p = 1).
    double nonlinear_factor = 1.0;
    /// f0_delta = control_factor * f0(delta^5 t).
    double control_factor = 1.0;
};

/// Throws DomainError unless 0 < delta <= 1.
ScaledProblem rescale_problem(const Problem& pb, double delta, const ScalingExponents& exponents = {});

/// delta^4 u on the scaled grid (aligned with the base grid node for node).
Trajectory scale_trajectory(const Trajectory& base, const ScaledProblem& sp);
TimeSignal scale_control(const TimeSignal& f0, const ScaledProblem& sp);

/// Four-point Lagrange interpolation of a trajectory in time and space; points
/// outside the grid throw DomainError.
double interpolate_cubic(const Trajectory& traj, double t, double x);

struct ScalingResidual {
    double pde_residual = 0.0;            ///< relative to the size of the individual terms
    double interpolation_error = 0.0;     ///< interpolated vs aligned samples of u_delta
    double base_residual = 0.0;           ///< same measure for u in the base equation
};

/// Solves the base nonlinear problem under f0 g (zero control when absent),
/// maps the solution to the scaled variables by interpolation and measures
/// the residual of a centered (leapfrog in time) discretization of the scaled
/// equation at interior points.
ScalingResidual scaling_residual(const Problem& pb, double delta, const std::optional<TimeSignal>& f0 = {},
                                 const ScalingExponents& exponents = {});

/// Residual measure used above, for a trajectory in an equation with the
/// given coefficients, nonlinear factor and forcing f0 g.
double discrete_pde_residual(const Trajectory& traj, const Coefficients& coefficients,
                             double nonlinear_factor, const TimeSignal& f0, const SourceShape& g);

struct ObservationEquivalence {
    double base_residual = 0.0;    ///< max |q - phi| / scale
    double scaled_residual = 0.0;  ///< same in scaled variables
    bool base_satisfied = false;
    bool scaled_satisfied = false;
    bool equivalent = false;
};

/// Compares how well (f0, u) meets the integral condition with how well the
/// scaled pair meets the scaled condition.
ObservationEquivalence observation_equivalence(const Problem& pb, const TimeSignal& f0, const Trajectory& u,
                                               double delta, double tol,
                                               const ScalingExponents& exponents = {});

struct MinimalTimeOptions {
    std::optional<double> solution_constant;  ///< C_T; estimated when absent
    bool certify = false;
    std::size_t certification_steps = 400;   ///< time steps of the certification run
    NonlinearOptions control;
};

struct MinimalTimeReport {
    double c0 = 0.0;
    double c1 = 0.0;
    double solution_constant = 0.0;
    double delta0 = 0.0;
    double delta_contraction = 0.0;  ///< (2 c0)^{-1/5}
    double delta_smallness = kInfinity;
    double T0 = 0.0;
    bool smallness_binding = false;
    bool certified = false;
    bool certification_attempted = false;
    double certification_residual = 0.0;
    std::string certification_note;
};

/// delta0 = min((2 c0)^{-1/5}, delta with delta^{1/2} c1 <= 1/(8 C^2 (1 + 1))) and
/// T0 = delta0^5. Optionally runs control_nonlinear on the problem rescaled by
/// delta0 at base horizon T0 (unit horizon in scaled variables).
MinimalTimeReport minimal_time(const Problem& pb, const MinimalTimeOptions& options = {});

}  // namespace kawa
