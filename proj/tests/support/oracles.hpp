#pragma once

// Reference values computed independently of the library: closed forms,
// brute-force quadrature and direct formulas.

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "kawa/core_model.hpp"
#include "kawa/solver.hpp"

namespace oracle {

/// Derivatives 0..5 of P(x) e^{-rate x} for a polynomial P (ascending
/// coefficients), by the recursion P_{k+1} = P_k' - rate P_k.
std::array<double, 6> poly_exp_derivatives(std::vector<double> coeffs, double rate, double x);

/// Manufactured solution u*(t,x) = e^{-t} (x + x^2) e^{-x}.
double mms_u(double t, double x);
/// Forcing that makes u* an exact solution for the given coefficients;
/// `nonlinear` adds u*^p u*_x.
double mms_forcing(double t, double x, const kawa::Coefficients& c, bool nonlinear);

/// Half-line problem whose data match u*: u0 = u*(0,.), mu = 0, nu = e^{-t}.
kawa::Problem mms_problem(double h, double tau, double T, double R = 40.0);
/// Nodal f1 samples of mms_forcing on the problem grid.
kawa::Forcing mms_forcing_field(const kawa::Problem& pb, bool nonlinear);
/// max_{n,j} |u(t_n,x_j) - u*(t_n,x_j)|.
double mms_error(const kawa::Trajectory& traj);

/// int_0^inf u*(t,x) x^3 e^{-x} dx = (4!/2^5 + 5!/2^6) e^{-t}.
double mms_observation(double t);

/// Composite Simpson rule of f on [a,b] with an even number of panels.
double simpson(const std::function<double(double)>& f, double a, double b, std::size_t panels);

/// c0 = (2/g0) sup_t ||g||_{L2} (|alpha| ||w'|| + |beta| ||w'''|| + ||w^(5)||) for
/// omega = x^3 e^{-x} and g = scale e^{-rate x} on [0,R], by Simpson quadrature.
double c0_cubic_exp(double alpha, double beta, double g0, double g_scale, double g_rate, double R);

/// Rectangle-rule L2 norm sqrt(dt dx sum f^2).
double rectangle_l2(const kawa::Field& f, double dt, double dx);

/// Energy functional max_t (||u(t)||^2 - 2 int_0^t int f u) by trapezoid sums,
/// written out directly from the nodal forcing.
double energy_gap(const kawa::Trajectory& traj, const kawa::Field& f);

/// max_n |a_n - b_n|.
double max_diff(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace oracle
