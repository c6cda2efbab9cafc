#pragma once

// Linearly implicit time integration of the Kawahara initial-boundary-value
// problem on a truncated interval.
//
// Spatial discretization: centered second-order stencils for d/dx, d^3/dx^3
// and d^5/dx^5. On the half-line the left data close the stencils through
// u_0 = mu and the ghost value u_{-1} = u_1 - 2 h nu; the first interior node
// uses a one-sided seven-point fifth-derivative stencil so that no second ghost
// is needed. At the right end u vanishes on the boundary node and beyond it
// (u = u_x = u_xx = 0). The linear part is advanced with the trapezoidal rule,
// the nonlinearity explicitly with second-order extrapolation.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kawa/core_model.hpp"
#include "kawa/field.hpp"

namespace kawa {

/// Right-hand side f = f1 + (f2)_x of the PDE, plus optional step-centered
/// sources used for explicitly treated terms.
struct Forcing {
    Field f1;           ///< nodal, (n_time+1) x (n_space+1); empty means zero
    Field f2;           ///< nodal; empty means absent
    Field f2x;          ///< analytic x-derivative of f2; empty means use a centered difference
    Field step_source;  ///< n_time x (n_space+1), applied at step midpoints
    std::string description = "zero";

    bool has_f2() const { return !f2.empty(); }

    /// f(t,x) = f0(t) g(t,x), assembled exactly at the nodes.
    static Forcing from_pair(const TimeSignal& f0, const SourceShape& g);

    /// f1 + f2x as a nodal field (zero field when both are absent).
    Field nodal_total(const SpaceTimeGrid& grid) const;

    /// The x-derivative of f2 used by the solver (analytic when supplied).
    Field f2_derivative(const SpaceTimeGrid& grid) const;

    Forcing negated() const;
};

struct Trajectory {
    SpaceTimeGrid grid;
    Domain domain;
    Coefficients coefficients;
    Field values;  ///< u(t_n, x_j)
    TimeSignal mu;
    TimeSignal nu;
    std::string forcing_record;
    bool forcing_has_f2 = false;
    bool nonlinear = false;

    std::span<const double> at(std::size_t n) const { return values.row(n); }
    /// sup_t ||u(t)||_{L2}
    double sup_l2() const;
};

/// The discrete spatial operator L = alpha D1 + beta D3 - D5 restricted to the
/// interior unknowns, with its trapezoidal-rule factorization.
class KawaharaOperator {
public:
    KawaharaOperator(const Coefficients& coefficients, const SpaceTimeGrid& grid);

    std::size_t interior_size() const { return n_; }
    const SpaceTimeGrid& grid() const { return grid_; }
    const Coefficients& coefficients() const { return coefficients_; }

    /// out = M u for interior vectors.
    void apply(std::span<const double> u, std::span<double> out) const;
    /// out = M^T w.
    void apply_transpose(std::span<const double> w, std::span<double> out) const;

    /// Contribution of mu and nu to L u at each interior node.
    std::span<const double> mu_column() const { return b_mu_; }
    std::span<const double> nu_column() const { return b_nu_; }

    /// Solves (I + tau/2 M) x = rhs in place.
    void solve_step(std::span<double> rhs) const;

    /// Reciprocal 1-norm condition estimate of I + tau/2 M.
    double reciprocal_condition() const { return rcond_; }

    static constexpr int kLower = 3;
    static constexpr int kUpper = 4;

private:
    Coefficients coefficients_;
    SpaceTimeGrid grid_;
    std::size_t n_ = 0;
    std::vector<double> band_;   ///< M rows, offsets -kLower..kUpper
    std::vector<double> lu_;     ///< LAPACK band LU of I + tau/2 M
    std::vector<int> pivots_;
    std::vector<double> b_mu_;
    std::vector<double> b_nu_;
    double rcond_ = 0.0;
};

/// Factored operators are cached per (coefficients, grid); repeated solves on
/// the same grid share one factorization. Thread-safe.
std::shared_ptr<const KawaharaOperator> operator_for(const Coefficients& coefficients,
                                                     const SpaceTimeGrid& grid);

/// Linear problem u_t + alpha u_x + beta u_xxx - u_xxxxx = f.
Trajectory solve_linear(const Problem& pb, const Forcing& forcing);

/// Same as solve_linear with explicit data, bypassing the problem's u0/mu/nu.
Trajectory solve_linear(const Problem& pb, std::span<const double> u0, const TimeSignal& mu,
                        const TimeSignal& nu, const Forcing& forcing);

/// Full equation with the u^p u_x term. Throws DivergenceError when
/// max|u| exceeds 1e6 times the data scale.
Trajectory solve_nonlinear(const Problem& pb, const Forcing& forcing);

/// Step-centered sources -(3/2 N(v^n) - 1/2 N(v^{n-1})) (and the trapezoidal
/// average at the first step) with N(v) = (v^{p+1}/(p+1))_x. This is exactly
/// the explicit term solve_nonlinear applies, so feeding these sources to
/// solve_linear reproduces solve_nonlinear at a fixed point v = u.
Field explicit_flux_sources(const Field& v, int power, double h);

/// max_t ( ||u(t)||^2 - 2 int_0^t int f u dx ds ) for a homogeneous-data run.
/// Throws PreconditionError when u0, mu or nu is nonzero.
double energy_residual(const Trajectory& traj, const Forcing& forcing);

struct RatioStatistics {
    std::vector<double> values;
    double max = 0.0;
    double median = 0.0;
    double min = 0.0;
    double mean = 0.0;

    static RatioStatistics from(std::vector<double> values);
};

/// sup_t ||u(t)||_{L2} / (||u0|| + ||mu||_{H^{2/5}} + ||nu||_{H^{1/5}} + ||f||_{L2L2})
/// over random admissible data on the base problem's grid. Members run in
/// parallel with seeds derived from the master seed.
RatioStatistics wellposedness_ratio(const Problem& base, int ensemble_size, std::uint64_t seed);

/// The ratio for a single data tuple (0 when all data vanish).
double wellposedness_ratio_single(const Problem& pb, std::span<const double> u0,
                                  const TimeSignal& mu, const TimeSignal& nu,
                                  const Forcing& forcing);

/// Per-member seed; a SplitMix64 step of the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace kawa
