#include "kawa/bourgain.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "fftw_util.hpp"
#include "kawa/error.hpp"
#include "kawa/kernels.hpp"

namespace kawa {

namespace {

struct Spectrum {
    std::vector<std::complex<double>> data;
    kernels::SpectrumLayout layout;
    double measure = 0.0;  ///< dt dx / (rows cols)
};

Spectrum transform(const SpaceTimeField& f, int padding) {
    if (padding < 1) throw DomainError("padding must be at least 1");
    const std::size_t rows = f.values.rows() * static_cast<std::size_t>(padding);
    const std::size_t cols = f.values.cols() * static_cast<std::size_t>(padding);
    Spectrum sp;
    sp.data.assign(rows * cols, {0.0, 0.0});
    for (std::size_t n = 0; n < f.values.rows(); ++n) {
        for (std::size_t j = 0; j < f.values.cols(); ++j) sp.data[n * cols + j] = f.values(n, j);
    }
    auto* io = reinterpret_cast<fftw_complex*>(sp.data.data());
    fftw_plan raw;
    {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        raw = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), io, io, FFTW_FORWARD,
                               FFTW_ESTIMATE);
    }
    detail::FftwPlan plan(raw);
    plan.execute();
    constexpr double two_pi = 2.0 * std::numbers::pi;
    sp.layout = {rows, cols, two_pi / (static_cast<double>(rows) * f.dt),
                 two_pi / (static_cast<double>(cols) * f.dx)};
    sp.measure = f.dt * f.dx / static_cast<double>(rows * cols);
    return sp;
}

kernels::SpectralWeight weight_for(SpaceTimeNorm kind, double s, double p) {
    switch (kind) {
        case SpaceTimeNorm::Xsb:
            return [s, p](double tau, double xi) {
                return std::pow(1.0 + xi * xi, s) * std::pow(bracket(tau - std::pow(xi, 5)), 2.0 * p);
            };
        case SpaceTimeNorm::Ysb:
            return [s, p](double tau, double xi) {
                return std::pow(bracket(tau), 2.0 * s / 5.0) * std::pow(bracket(tau - std::pow(xi, 5)), 2.0 * p);
            };
        case SpaceTimeNorm::Dalpha:
            return [p](double tau, double xi) { return std::abs(xi) <= 1.0 ? std::pow(bracket(tau), 2.0 * p) : 0.0; };
    }
    throw ContractError("unknown norm kind");
}

double norm_of(const Spectrum& sp, const kernels::SpectralWeight& w) {
    return std::sqrt(sp.measure * kernels::weighted_spectrum_sum(sp.data, sp.layout, w));
}

}  // namespace

SpaceTimeField SpaceTimeField::from(const Trajectory& traj) {
    SpaceTimeField f;
    f.values = traj.values;
    f.dt = traj.grid.tau;
    f.dx = traj.grid.h;
    return f;
}

double weighted_spacetime_norm(const SpaceTimeField& f, SpaceTimeNorm kind, double s, double b_or_alpha,
                               int padding) {
    if (!std::isfinite(s) || !std::isfinite(b_or_alpha)) throw DomainError("norm parameters must be finite");
    if (f.values.empty() || f.values.max_abs() == 0.0) return 0.0;
    return norm_of(transform(f, padding), weight_for(kind, s, b_or_alpha));
}

double intersection_norm(const SpaceTimeField& f, double s, double b, double alpha, int padding) {
    if (f.values.empty() || f.values.max_abs() == 0.0) return 0.0;
    const Spectrum sp = transform(f, padding);
    return std::max(norm_of(sp, weight_for(SpaceTimeNorm::Xsb, s, b)),
                    norm_of(sp, weight_for(SpaceTimeNorm::Dalpha, 0.0, alpha)));
}

double bilinear_ratio(const SpaceTimeField& u, const SpaceTimeField& v, double s, double b, double alpha,
                      int padding) {
    if (u.values.rows() != v.values.rows() || u.values.cols() != v.values.cols() || u.dt != v.dt ||
        u.dx != v.dx) {
        throw DimensionError("bilinear probe factors live on different windows");
    }
    const double nu = intersection_norm(u, s, b, alpha, padding);
    const double nv = intersection_norm(v, s, b, alpha, padding);
    if (nu == 0.0 || nv == 0.0) return 0.0;
    SpaceTimeField w = u;
    for (std::size_t n = 0; n < w.values.rows(); ++n) {
        for (std::size_t j = 0; j < w.values.cols(); ++j) w.values(n, j) *= v.values(n, j);
    }
    // The x-derivative enters the weight as xi^2.
    const auto base = weight_for(SpaceTimeNorm::Xsb, s, -b);
    const double num = norm_of(transform(w, padding), [&](double tau, double xi) { return xi * xi * base(tau, xi); });
    return num / (nu * nv);
}

SpaceTimeField probe_field(const ProbeOptions& o, std::uint64_t member_seed) {
    std::mt19937_64 rng(member_seed);
    std::normal_distribution<double> amp(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    constexpr int kBumps = 3;
    struct Bump {
        double a, t0, x0, st, sx;
    };
    std::vector<Bump> bumps;
    for (int k = 0; k < kBumps; ++k) {
        Bump bp{};
        bp.a = amp(rng);
        bp.t0 = o.window_time * (0.35 + 0.3 * unit(rng));
        bp.x0 = o.window_space * (-0.15 + 0.3 * unit(rng));
        bp.st = o.window_time * (0.06 + 0.04 * unit(rng));
        bp.sx = o.window_space * (0.04 + 0.04 * unit(rng));
        bumps.push_back(bp);
    }
    SpaceTimeField f;
    f.dt = o.window_time / static_cast<double>(o.n_time);
    f.dx = o.window_space / static_cast<double>(o.n_space);
    f.values = Field(o.n_time + 1, o.n_space + 1);
    for (std::size_t n = 0; n <= o.n_time; ++n) {
        const double t = f.dt * static_cast<double>(n);
        for (std::size_t j = 0; j <= o.n_space; ++j) {
            const double x = -0.5 * o.window_space + f.dx * static_cast<double>(j);
            double v = 0.0;
            for (const Bump& bp : bumps) {
                const double zt = (t - bp.t0) / bp.st;
                const double zx = (x - bp.x0) / bp.sx;
                v += bp.a * std::exp(-0.5 * (zt * zt + zx * zx));
            }
            f.values(n, j) = v;
        }
    }
    return f;
}

ProbeReport bilinear_probe(const ProbeOptions& o) {
    if (!(o.b < 0.5)) throw DomainError("bilinear probe requires b < 1/2");
    if (!(o.alpha > 0.5)) throw DomainError("bilinear probe requires alpha > 1/2");
    if (!(o.s > -1.75)) throw DomainError("bilinear probe requires s > -7/4");
    if (o.ensemble_size < 1) throw DomainError("ensemble size must be positive");
    ProbeReport rep;
    rep.options = o;
    rep.ratios.assign(static_cast<std::size_t>(o.ensemble_size), 0.0);
    const auto m = static_cast<long long>(o.ensemble_size);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < m; ++i) {
        const auto k = static_cast<std::uint64_t>(i);
        const SpaceTimeField u = probe_field(o, derive_seed(o.seed, 2 * k));
        const SpaceTimeField v = probe_field(o, derive_seed(o.seed, 2 * k + 1));
        rep.ratios[static_cast<std::size_t>(i)] = bilinear_ratio(u, v, o.s, o.b, o.alpha);
    }
    const RatioStatistics st = RatioStatistics::from(rep.ratios);
    rep.max = st.max;
    rep.median = st.median;
    rep.min = st.min;
    return rep;
}

ZTraceReport z_trace_diagnostics(const SpaceTimeField& f, double s) {
    const double o0 = (s + 2.0) / 5.0;
    const double o1 = (s + 1.0) / 5.0;
    if (o0 < 0.0 || o0 > 1.0 || o1 < 0.0 || o1 > 1.0) throw DomainError("trace orders must lie in [0, 1]");
    ZTraceReport rep;
    rep.s = s;
    const std::size_t rows = f.values.rows();
    const std::size_t cols = f.values.cols();
    if (rows < 2 || cols < 3) return rep;
    TimeSignal col;
    col.dt = f.dt;
    col.samples.resize(rows);
    for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t n = 0; n < rows; ++n) col.samples[n] = f.values(n, j);
        rep.trace0 = std::max(rep.trace0, fractional_sobolev_norm(col, o0));
        for (std::size_t n = 0; n < rows; ++n) {
            double d;
            if (j == 0) {
                d = (-3.0 * f.values(n, 0) + 4.0 * f.values(n, 1) - f.values(n, 2)) / (2.0 * f.dx);
            } else if (j + 1 == cols) {
                d = (3.0 * f.values(n, j) - 4.0 * f.values(n, j - 1) + f.values(n, j - 2)) / (2.0 * f.dx);
            } else {
                d = (f.values(n, j + 1) - f.values(n, j - 1)) / (2.0 * f.dx);
            }
            col.samples[n] = d;
        }
        rep.trace1 = std::max(rep.trace1, fractional_sobolev_norm(col, o1));
    }
    return rep;
}

}  // namespace kawa
