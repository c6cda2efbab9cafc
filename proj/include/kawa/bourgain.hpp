#pragma once

// Discrete surrogates of the Fourier restriction norms X^{s,b}, Y^{s,b} and
// D^alpha, and an empirical probe of the bilinear estimate
//   ||d_x(uv)||_{X^{s,-b}} <= c ||u||_{X^{s,b} cap D^alpha} ||v||_{X^{s,b} cap D^alpha}.
//
// Fields are zero-extended off their window before transforming, so the
// norms are upper surrogates of the restriction norms (an infimum over
// extensions), never the infimum itself.

#include <cstdint>
#include <string>
#include <vector>

#include "kawa/field.hpp"
#include "kawa/solver.hpp"

namespace kawa {

/// Samples f(t_n, x_j) on a uniform window; rows are time levels.
struct SpaceTimeField {
    Field values;
    double dt = 1.0;
    double dx = 1.0;
    std::string extension = "zero";

    static SpaceTimeField from(const Trajectory& traj);
};

enum class SpaceTimeNorm { Xsb, Ysb, Dalpha };

/// Weighted l2 norm of the 2-D transform of the field zero-padded to
/// `padding` times its size. For Dalpha the second parameter is alpha and s is
/// ignored. With s = b = 0 the Xsb norm equals the rectangle-rule L2 norm.
double weighted_spacetime_norm(const SpaceTimeField& f, SpaceTimeNorm kind, double s, double b_or_alpha,
                               int padding = 2);

/// max(||f||_{X^{s,b}}, ||f||_{D^alpha}).
double intersection_norm(const SpaceTimeField& f, double s, double b, double alpha, int padding = 2);

/// ||d_x(uv)||_{X^{s,-b}} / (||u|| ||v||) in the intersection norm; 0 when
/// either factor vanishes.
double bilinear_ratio(const SpaceTimeField& u, const SpaceTimeField& v, double s, double b, double alpha,
                      int padding = 2);

struct ProbeOptions {
    int ensemble_size = 100;
    double s = 0.0;
    double b = 0.45;
    double alpha = 0.55;
    std::uint64_t seed = 7;
    std::size_t n_time = 64;   ///< time intervals of the probe window
    std::size_t n_space = 128; ///< space intervals of the probe window
    double window_time = 6.0;
    double window_space = 20.0;  ///< the window is [-L/2, L/2]
};

struct ProbeReport {
    ProbeOptions options;
    std::vector<double> ratios;
    double max = 0.0;
    double median = 0.0;
    double min = 0.0;
    /// Always true: the ratios are measurements, not bounds.
    bool empirical_only = true;
};

/// Random pairs of smooth space-time bumps (a fixed physical configuration per
/// member seed, so refining n_time and n_space resolves the same fields).
/// Throws DomainError unless b < 1/2, alpha > 1/2 and s > -7/4.
ProbeReport bilinear_probe(const ProbeOptions& options);

/// Random member of the probe ensemble, sampled on the probe window.
SpaceTimeField probe_field(const ProbeOptions& options, std::uint64_t member_seed);

struct ZTraceReport {
    double s = 0.0;
    double trace0 = 0.0;  ///< max over grid columns of ||f(., x)||_{H^{(s+2)/5}}
    double trace1 = 0.0;  ///< max over grid columns of ||f_x(., x)||_{H^{(s+1)/5}}
};

/// Boundary-trace components of the Z norm, as a maximum over grid columns.
/// Requires (s+2)/5 and (s+1)/5 in [0, 1].
ZTraceReport z_trace_diagnostics(const SpaceTimeField& f, double s);

}  // namespace kawa
