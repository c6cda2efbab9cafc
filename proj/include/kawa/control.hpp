#pragma once

// Internal control f(t,x) = f0(t) g(t,x) steering the weighted observation
// q(t) = int u omega to a prescribed target phi(t).
//
// The control is the fixed point of f0 = A f0 with
//   (A f0)(t) = (phi'(t) - r[u](t)) / g1(t),   u = S(0, 0, 0, f0 g),
// where r[u] is the observation rate produced by u itself. All rates are the
// discrete ones of the time integrator (see DiscreteObservation), and phi' is
// replaced by the derivative whose trapezoidal integral reproduces phi at the
// nodes, so a converged control tracks phi to round-off rather than to the
// truncation error of the scheme.

#include <optional>
#include <string>
#include <vector>

#include "kawa/core_model.hpp"
#include "kawa/observation.hpp"
#include "kawa/solver.hpp"
#include "kawa/verdict.hpp"

namespace kawa {

struct G1Trace {
    TimeSignal g1;  ///< int g(t,x) omega(x) dx
    double min_abs = 0.0;
    bool clamped = false;  ///< quadrature noise below g0 was clamped
};

/// Throws HypothesisError when |g1| < g0 (beyond 1e-12 of quadrature noise) or
/// g1 changes sign.
G1Trace g1_trace(const SourceShape& g, const Weight& omega, const SpaceTimeGrid& grid, double g0);

struct ContractionConstants {
    double c0 = 0.0;
    double gamma_star = 0.0;
    double kappa_measured = 0.0;  ///< 0 until a Picard run measured it
    double g0 = 0.0;
    double g_sup_l2 = 0.0;         ///< sup_t ||g(t,.)||_{L2}
    double weight_combination = 0.0;  ///< |a| ||w'|| + |b| ||w'''|| + ||w'''''||
};

/// c0 = (2/g0) sup_t ||g(t)||_{L2} (|alpha| ||w'|| + |beta| ||w'''|| + ||w'''''||)
/// and gamma* = (2 c0 T^{1/p})^{p'} / p' (2 c0 for p = infinity).
ContractionConstants compute_constants(const Problem& pb);

/// One application of A to f0 with the problem's target phi.
TimeSignal apply_A(const TimeSignal& f0, const Problem& pb);

struct ControlResult {
    TimeSignal f0;
    Trajectory trajectory;
    TimeSignal q;
    double residual = 0.0;  ///< max_n |q_n - phi_n|
    double scale = 1.0;     ///< max |phi|, or 1 when phi vanishes
    int iterations = 0;
    bool converged = false;
    ContractionConstants constants;
    std::vector<double> update_norms;    ///< sup-norm Picard updates
    std::vector<double> weighted_updates;  ///< e^{-gamma* t}-weighted L^p updates
    std::vector<double> contraction_ratios;
    /// Derivative of the target handed to the Gamma solve (phi, or phi minus
    /// the free response in the linear control).
    TimeSignal gamma_target_derivative;

    // Nonlinear control only.
    std::vector<double> outer_differences;
    std::vector<double> outer_ratios;
    int outer_iterations = 0;
    double smallness_c1 = 0.0;
    double smallness_threshold = 0.0;
    double ball_radius = 0.0;
    double solution_constant = 0.0;  ///< C_T used by the smallness gate
    Verdict smallness = Verdict::Skipped;
    double closed_loop_residual = 0.0;
    std::vector<std::string> warnings;
};

struct PicardOptions {
    double tol = 1e-10;
    int max_iter = 200;
    /// Warm start; zero when absent.
    std::optional<TimeSignal> initial;
    /// Exponential weight of the contraction norm; gamma* when absent.
    std::optional<double> gamma;
};

/// Fixed point f0 = Gamma(phi) of A with homogeneous data (requires phi(0) = 0).
/// Throws IterationError when max_iter is exhausted, PreconditionError when
/// phi(0) != 0, HypothesisError when g1 violates the lower bound.
ControlResult solve_gamma(const TimeSignal& phi, const Problem& pb, const PicardOptions& options = {});

/// Linear control with data (u0, mu, nu) and an optional f2 source: the free
/// response v1 = S(u0, mu, nu, -f2x) plus v2 = S(0, 0, 0, f0 g) with
/// f0 = Gamma(phi - q[v1]).
ControlResult control_linear(const Problem& pb, const Forcing* f2 = nullptr,
                             const PicardOptions& options = {});

struct NonlinearOptions {
    double tol = 1e-9;
    int max_iter = 60;
    double inner_tol = 1e-11;
    int inner_max_iter = 200;
    /// Constant of the linear estimate; estimated from a random ensemble when absent.
    std::optional<double> solution_constant;
    int ensemble_size = 8;
    std::uint64_t seed = 1;
};

/// Fixed point of Theta: v -> linear control with the explicit nonlinear
/// flux of v as source. Ends with a closed-loop nonlinear re-solve under the
/// computed control.
ControlResult control_nonlinear(const Problem& pb, const NonlinearOptions& options = {});

/// c1 = ||u0|| + ||mu||_{H^{2/5}} + ||nu||_{H^{1/5}} + ||phi'||_{L2}.
double data_size(const Problem& pb);

/// ||f0||_p <= (2/g0) ||phi'||_p (1 + 1e-2) whenever c0 T <= p^{1/p}/2; skipped otherwise.
BoundCheck refined_bound_check(const ControlResult& result, const Problem& pb);

/// |[u(T)] - int uT omega| <= residual + quadrature tolerance for an
/// endpoint-compatible target. Throws PreconditionError when mu or nu is
/// nonzero or phi does not match the endpoint masses.
BoundCheck mass_control_check(const Problem& pb, std::span<const double> uT, const ControlResult& result);

/// Tolerance on |phi(0) - int u0 omega| and |phi(T) - int uT omega|.
double endpoint_tolerance(std::span<const double> u, const SpaceTimeGrid& grid);

}  // namespace kawa
