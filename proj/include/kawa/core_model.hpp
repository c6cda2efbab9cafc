#pragma once

// Domain types, analytic presets, problem validation and the discrete norm
// primitives shared by every other module.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kawa/field.hpp"

namespace kawa {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// u_t + alpha u_x + beta u_xxx - u_xxxxx + u^p u_x = f.
struct Coefficients {
    double alpha = 1.0;
    double beta = 1.0;
    int nonlinearity_power = 1;

    bool operator==(const Coefficients&) const = default;
};

enum class DomainKind { RightHalfLine, RealLine };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& s);

struct Domain {
    DomainKind kind = DomainKind::RightHalfLine;
    double truncation_radius = 40.0;  ///< right cutoff R
    double left_cutoff = 0.0;         ///< L, RealLine only: interval is [-L, R]

    double left() const { return kind == DomainKind::RealLine ? -left_cutoff : 0.0; }
    double right() const { return truncation_radius; }
    double length() const { return right() - left(); }

    bool operator==(const Domain&) const = default;
};

/// Uniform space-time grid. n_space and n_time count intervals, so there are
/// n_space+1 spatial nodes and n_time+1 time levels.
struct SpaceTimeGrid {
    double h = 0.0;
    double tau = 0.0;
    std::size_t n_space = 0;
    std::size_t n_time = 0;
    double T = 0.0;
    double x_left = 0.0;

    double x(std::size_t j) const { return x_left + static_cast<double>(j) * h; }
    double t(std::size_t n) const { return static_cast<double>(n) * tau; }
    std::size_t space_nodes() const { return n_space + 1; }
    std::size_t time_levels() const { return n_time + 1; }

    std::vector<double> x_nodes() const;
    std::vector<double> t_nodes() const;

    /// Builds a grid on the domain's computational interval. Throws
    /// ValidationError when h or tau do not divide the interval / horizon to
    /// one part in 1e9.
    static SpaceTimeGrid make(const Domain& domain, double h, double tau, double T);

    bool operator==(const SpaceTimeGrid&) const = default;
};

/// (w, w', w'', w''', w'''', w''''') at a point.
using WeightDerivatives = std::array<double, 6>;

enum class WeightClass { J_right, RealLineH5 };

/// Test function omega with closed-form derivatives up to order five.
class Weight {
public:
    using Eval = std::function<WeightDerivatives(double)>;

    Weight() = default;
    Weight(std::string name, WeightClass cls, Eval eval)
        : name_(std::move(name)), class_tag_(cls), eval_(std::move(eval)) {}

    const std::string& name() const { return name_; }
    WeightClass class_tag() const { return class_tag_; }
    double amplitude() const { return amplitude_; }
    double dilation() const { return dilation_; }

    WeightDerivatives operator()(double x) const;

    /// c * omega(x).
    Weight scaled_amplitude(double c) const;
    /// omega(delta * x); derivatives pick up delta^k.
    Weight dilated(double delta) const;

    /// Returns a copy carrying cached samples of all six derivative orders on
    /// the grid's spatial nodes.
    Weight bound_to(const SpaceTimeGrid& grid) const;
    bool is_bound() const { return !samples_[0].empty(); }
    std::span<const double> samples(int order) const { return samples_.at(order); }

private:
    std::string name_;
    WeightClass class_tag_ = WeightClass::J_right;
    Eval eval_;
    double amplitude_ = 1.0;
    double dilation_ = 1.0;
    std::array<std::vector<double>, 6> samples_;
};

/// Analytic weight presets: "cubic_exp" (x^3 e^-x), "quartic_exp" (x^4 e^-x),
/// "gaussian_realline" (e^{-x^2}). Unknown names throw ConfigError.
Weight preset_weight(const std::string& name);

/// Time-sampled signal on the uniform time grid (n_time+1 samples).
struct TimeSignal {
    std::vector<double> samples;
    double dt = 0.0;
    double p_exponent = 2.0;
    /// Analytic derivative samples when known; empty otherwise.
    std::vector<double> derivative;

    std::size_t size() const { return samples.size(); }
    double horizon() const { return dt * static_cast<double>(samples.empty() ? 0 : samples.size() - 1); }
    double max_abs() const;

    static TimeSignal zeros(const SpaceTimeGrid& grid);
};

/// Source profile g(t, x) of the internal control f(t, x) = f0(t) g(t, x).
struct SourceShape {
    std::function<double(double, double)> eval;  ///< may be empty for sampled data
    Field grid_samples;
};

/// Serializable description of a space or time datum: a named preset with
/// numeric parameters, or explicit samples.
struct DataSpec {
    std::string preset;
    std::map<std::string, double> params;
    std::vector<double> samples;  ///< 1-D samples (u0, mu, nu, phi)
    Field samples2d;              ///< space-time samples (g)

    bool is_preset() const { return !preset.empty(); }
    double param(const std::string& key, double fallback) const;
    bool operator==(const DataSpec&) const = default;

    static DataSpec named(std::string name, std::map<std::string, double> params = {});
};

/// Everything needed to rebuild a Problem. This is the unit of (de)serialization.
struct ProblemSpec {
    Coefficients coefficients;
    Domain domain;
    double h = 0.02;
    double tau = 5e-4;
    double T = 1.0;
    DataSpec u0 = DataSpec::named("zero");
    DataSpec mu = DataSpec::named("zero");
    DataSpec nu = DataSpec::named("zero");
    DataSpec g = DataSpec::named("exp_decay");
    DataSpec omega = DataSpec::named("cubic_exp");
    DataSpec phi = DataSpec::named("zero");
    double p = 2.0;
    double g0 = 0.375;

    bool operator==(const ProblemSpec&) const = default;
};

/// A fully materialized control experiment.
struct Problem {
    ProblemSpec spec;
    Coefficients coefficients;
    Domain domain;
    SpaceTimeGrid grid;
    std::vector<double> u0;
    TimeSignal mu;
    TimeSignal nu;
    SourceShape g;
    Weight omega;  ///< bound to grid
    TimeSignal phi;
    double p = 2.0;
    double g0 = 0.0;
};

/// Samples presets onto the grid. Throws ConfigError on unknown presets or
/// parameters, DimensionError when sample arrays have the wrong size.
Problem build_problem(const ProblemSpec& spec);

/// Rebuilds the problem on a new horizon and/or resolution. Requires preset
/// data (sampled data cannot be resampled).
Problem with_grid(const Problem& pb, double h, double tau, double T);

/// Space preset evaluation (u0-type data), exposed for tests and oracles.
double eval_space_preset(const DataSpec& spec, double x);
/// Time preset value and derivative.
std::pair<double, double> eval_time_preset(const DataSpec& spec, double t);
double eval_source_preset(const DataSpec& spec, double t, double x);

struct Check {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    bool hypothesis = false;  ///< a theorem hypothesis rather than a structural check
    std::string detail;
};

struct ValidationReport {
    std::vector<Check> checks;

    bool passed() const;
    /// True when every failing check is a hypothesis check.
    bool only_hypotheses_failed() const;
    const Check* find(const std::string& name) const;
    std::string summary() const;
};

/// Checks compatibility phi(0) = int u0 omega, the lower bound |g1| >= g0,
/// weight class membership, data decay at the truncation boundary and grid
/// sanity. Pure: identical problems produce identical reports.
ValidationReport validate_problem(const Problem& pb);

/// Throws ValidationError / HypothesisError when the report failed.
void require_valid(const ValidationReport& report);

// ---------------------------------------------------------------------------
// Norms and quadrature.

/// Composite trapezoid rule with spacing h.
double trapezoid(std::span<const double> values, double h);
/// Composite trapezoid of the product a*b.
double trapezoid_product(std::span<const double> a, std::span<const double> b, double h);
double l2_norm(std::span<const double> values, double h);

/// Composite-trapezoid L^p(0,T) norm; p = infinity gives the max norm.
double lp_time_norm(const TimeSignal& s, double p);

/// Discrete H^order(0,T) surrogate: DFT of the even reflection of the samples
/// with weight <xi>^{2 order}. At order 0 this coincides with the trapezoid L2
/// norm.
double fractional_sobolev_norm(const TimeSignal& s, double order);

/// Japanese bracket (1 + |x|^2)^{1/2}.
inline double bracket(double x) { return std::sqrt(1.0 + x * x); }

/// Default truncation tolerance for decay checks.
inline constexpr double kDecayTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-12;

}  // namespace kawa
