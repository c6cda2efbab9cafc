#include "kawa/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "fftw_util.hpp"
#include "kawa/error.hpp"
#include "kawa/kernels.hpp"

namespace kawa {

std::string to_string(DomainKind kind) {
    return kind == DomainKind::RealLine ? "RealLine" : "RightHalfLine";
}

DomainKind domain_kind_from_string(const std::string& s) {
    if (s == "RightHalfLine") return DomainKind::RightHalfLine;
    if (s == "RealLine") return DomainKind::RealLine;
    throw ConfigError("unknown domain kind '" + s + "'");
}

std::vector<double> SpaceTimeGrid::x_nodes() const {
    std::vector<double> x(space_nodes());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = this->x(j);
    return x;
}

std::vector<double> SpaceTimeGrid::t_nodes() const {
    std::vector<double> t(time_levels());
    for (std::size_t n = 0; n < t.size(); ++n) t[n] = this->t(n);
    return t;
}

SpaceTimeGrid SpaceTimeGrid::make(const Domain& domain, double h, double tau, double T) {
    if (!(h > 0.0) || !(tau > 0.0) || !(T > 0.0) || !std::isfinite(h) || !std::isfinite(tau) ||
        !std::isfinite(T)) {
        throw ValidationError("grid requires finite h > 0, tau > 0, T > 0");
    }
    if (!(domain.truncation_radius > 0.0)) throw ValidationError("truncation radius must be > 0");
    if (domain.kind == DomainKind::RealLine && !(domain.left_cutoff > 0.0)) {
        throw ValidationError("RealLine domain requires left_cutoff > 0");
    }
    const double length = domain.length();
    const double ns = std::round(length / h);
    const double nt = std::round(T / tau);
    if (std::abs(ns * h - length) > 1e-9 * length) throw ValidationError("h does not divide the computational interval");
    if (ns < 8.0) throw ValidationError("grid needs at least 8 space intervals");
    if (std::abs(nt * tau - T) > 1e-9 * T) throw ValidationError("tau does not divide the horizon T");
    if (nt < 2.0) throw ValidationError("grid needs at least 2 time steps");
    SpaceTimeGrid g;
    g.h = h;
    g.tau = tau;
    g.n_space = static_cast<std::size_t>(ns);
    g.n_time = static_cast<std::size_t>(nt);
    g.T = T;
    g.x_left = domain.left();
    return g;
}

// ---------------------------------------------------------------------------
// Weights.

namespace {

// d^k/dx^k [x^n e^{-x}] = e^{-x} sum_i C(k,i) (-1)^{k-i} n!/(n-i)! x^{n-i}
WeightDerivatives power_exp_derivatives(int n, double x) {
    WeightDerivatives d{};
    const double e = std::exp(-x);
    for (int k = 0; k <= 5; ++k) {
        double s = 0.0;
        double binom = 1.0;  // C(k, i)
        for (int i = 0; i <= std::min(k, n); ++i) {
            if (i > 0) binom = binom * (k - i + 1) / i;
            double falling = 1.0;  // n!/(n-i)!
            for (int m = 0; m < i; ++m) falling *= (n - m);
            const double sign = ((k - i) % 2 == 0) ? 1.0 : -1.0;
            s += binom * sign * falling * std::pow(x, n - i);
        }
        d[k] = s * e;
    }
    return d;
}

// d^k/dx^k e^{-x^2} = (-1)^k H_k(x) e^{-x^2}, physicists' Hermite polynomials.
WeightDerivatives gaussian_derivatives(double x) {
    WeightDerivatives d{};
    const double e = std::exp(-x * x);
    double h_prev = 1.0;
    double h_cur = 2.0 * x;
    d[0] = e;
    d[1] = -h_cur * e;
    for (int k = 1; k < 5; ++k) {
        const double h_next = 2.0 * x * h_cur - 2.0 * k * h_prev;
        h_prev = h_cur;
        h_cur = h_next;
        d[k + 1] = ((k + 1) % 2 == 0 ? 1.0 : -1.0) * h_cur * e;
    }
    return d;
}

}  // namespace

WeightDerivatives Weight::operator()(double x) const {
    WeightDerivatives d = eval_(dilation_ * x);
    double f = amplitude_;
    for (double& v : d) {
        v *= f;
        f *= dilation_;
    }
    return d;
}

Weight Weight::scaled_amplitude(double c) const {
    Weight w = *this;
    w.amplitude_ *= c;
    for (auto& s : w.samples_) {
        for (double& v : s) v *= c;
    }
    return w;
}

Weight Weight::dilated(double delta) const {
    Weight w = *this;
    w.dilation_ *= delta;
    for (auto& s : w.samples_) s.clear();
    return w;
}

Weight Weight::bound_to(const SpaceTimeGrid& grid) const {
    Weight w = *this;
    const std::size_t n = grid.space_nodes();
    for (auto& s : w.samples_) s.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const auto d = (*this)(grid.x(j));
        for (int k = 0; k < 6; ++k) w.samples_[k][j] = d[k];
    }
    return w;
}

Weight preset_weight(const std::string& name) {
    if (name == "cubic_exp") {
        return Weight(name, WeightClass::J_right, [](double x) { return power_exp_derivatives(3, x); });
    }
    if (name == "quartic_exp") {
        return Weight(name, WeightClass::J_right, [](double x) { return power_exp_derivatives(4, x); });
    }
    if (name == "gaussian_realline") {
        return Weight(name, WeightClass::RealLineH5, gaussian_derivatives);
    }
    throw ConfigError("unknown weight preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Data presets.

double TimeSignal::max_abs() const {
    double m = 0.0;
    for (double v : samples) m = std::max(m, std::abs(v));
    return m;
}

TimeSignal TimeSignal::zeros(const SpaceTimeGrid& grid) {
    TimeSignal s;
    s.samples.assign(grid.time_levels(), 0.0);
    s.derivative.assign(grid.time_levels(), 0.0);
    s.dt = grid.tau;
    return s;
}

double DataSpec::param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

DataSpec DataSpec::named(std::string name, std::map<std::string, double> params) {
    DataSpec d;
    d.preset = std::move(name);
    d.params = std::move(params);
    return d;
}

namespace {

void require_params(const DataSpec& spec, const std::set<std::string>& allowed,
                    const std::string& what) {
    for (const auto& [k, v] : spec.params) {
        if (!allowed.count(k)) {
            throw ConfigError("preset '" + spec.preset + "' for " + what +
                              " does not accept parameter '" + k + "'");
        }
        if (!std::isfinite(v)) throw ConfigError("non-finite parameter '" + k + "'");
    }
}

const std::map<std::string, std::set<std::string>>& space_presets() {
    static const std::map<std::string, std::set<std::string>> m = {
        {"zero", {}},
        {"exp_decay", {"scale", "rate"}},
        {"power_exp", {"scale", "power", "rate"}},
        {"gaussian", {"scale", "center", "width"}},
        {"mms", {"scale"}},
    };
    return m;
}

const std::map<std::string, std::set<std::string>>& time_presets() {
    static const std::map<std::string, std::set<std::string>> m = {
        {"zero", {}},
        {"constant", {"offset", "scale"}},
        {"linear", {"offset", "scale"}},
        {"t_exp", {"offset", "scale", "rate"}},
        {"sin", {"offset", "scale", "rate"}},
        {"exp_decay", {"offset", "scale", "rate"}},
    };
    return m;
}

const std::map<std::string, std::set<std::string>>& source_presets() {
    static const std::map<std::string, std::set<std::string>> m = {
        {"exp_decay", {"scale", "rate"}},
        {"modulated_exp", {"scale", "rate", "amp", "freq"}},
        {"gaussian", {"scale", "center", "width"}},
        {"sign_change", {"scale", "rate", "freq"}},
    };
    return m;
}

void check_preset(const DataSpec& spec, const std::map<std::string, std::set<std::string>>& table,
                  const std::string& what) {
    auto it = table.find(spec.preset);
    if (it == table.end()) throw ConfigError("unknown " + what + " preset '" + spec.preset + "'");
    require_params(spec, it->second, what);
}

}  // namespace

double eval_space_preset(const DataSpec& spec, double x) {
    const std::string& p = spec.preset;
    const double scale = spec.param("scale", 1.0);
    if (p == "zero") return 0.0;
    if (p == "exp_decay") return scale * std::exp(-spec.param("rate", 1.0) * x);
    if (p == "power_exp") {
        return scale * std::pow(x, spec.param("power", 1.0)) * std::exp(-spec.param("rate", 1.0) * x);
    }
    if (p == "gaussian") {
        const double z = (x - spec.param("center", 0.0)) / spec.param("width", 1.0);
        return scale * std::exp(-z * z);
    }
    if (p == "mms") return scale * (x + x * x) * std::exp(-x);
    throw ConfigError("unknown space preset '" + p + "'");
}

std::pair<double, double> eval_time_preset(const DataSpec& spec, double t) {
    const std::string& p = spec.preset;
    const double offset = spec.param("offset", 0.0);
    const double scale = spec.param("scale", 1.0);
    const double rate = spec.param("rate", 1.0);
    if (p == "zero") return {0.0, 0.0};
    if (p == "constant") return {offset + scale, 0.0};
    if (p == "linear") return {offset + scale * t, scale};
    if (p == "t_exp") {
        const double e = std::exp(-rate * t);
        return {offset + scale * t * e, scale * (1.0 - rate * t) * e};
    }
    if (p == "sin") return {offset + scale * std::sin(rate * t), scale * rate * std::cos(rate * t)};
    if (p == "exp_decay") {
        const double e = std::exp(-rate * t);
        return {offset + scale * e, -scale * rate * e};
    }
    throw ConfigError("unknown time preset '" + p + "'");
}

double eval_source_preset(const DataSpec& spec, double t, double x) {
    const std::string& p = spec.preset;
    const double scale = spec.param("scale", 1.0);
    const double rate = spec.param("rate", 1.0);
    if (p == "exp_decay") return scale * std::exp(-rate * x);
    if (p == "modulated_exp") {
        return scale * (1.0 + spec.param("amp", 0.5) * std::sin(spec.param("freq", 1.0) * t)) *
               std::exp(-rate * x);
    }
    if (p == "gaussian") {
        const double z = (x - spec.param("center", 5.0)) / spec.param("width", 1.0);
        return scale * std::exp(-z * z);
    }
    if (p == "sign_change") return scale * std::cos(spec.param("freq", 1.0) * t) * std::exp(-rate * x);
    throw ConfigError("unknown source preset '" + p + "'");
}

namespace {

std::vector<double> materialize_space(const DataSpec& spec, const SpaceTimeGrid& grid,
                                      const std::string& what) {
    if (spec.is_preset()) {
        check_preset(spec, space_presets(), what);
        std::vector<double> v(grid.space_nodes());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = eval_space_preset(spec, grid.x(j));
        return v;
    }
    if (spec.samples.size() != grid.space_nodes()) {
        throw DimensionError(what + ": expected " + std::to_string(grid.space_nodes()) +
                             " samples, got " + std::to_string(spec.samples.size()));
    }
    return spec.samples;
}

TimeSignal materialize_time(const DataSpec& spec, const SpaceTimeGrid& grid, double p,
                            const std::string& what) {
    TimeSignal s;
    s.dt = grid.tau;
    s.p_exponent = p;
    if (spec.is_preset()) {
        check_preset(spec, time_presets(), what);
        s.samples.resize(grid.time_levels());
        s.derivative.resize(grid.time_levels());
        for (std::size_t n = 0; n < s.samples.size(); ++n) {
            auto [v, dv] = eval_time_preset(spec, grid.t(n));
            s.samples[n] = v;
            s.derivative[n] = dv;
        }
        return s;
    }
    if (spec.samples.size() != grid.time_levels()) {
        throw DimensionError(what + ": expected " + std::to_string(grid.time_levels()) +
                             " samples, got " + std::to_string(spec.samples.size()));
    }
    s.samples = spec.samples;
    return s;
}

SourceShape materialize_source(const DataSpec& spec, const SpaceTimeGrid& grid) {
    SourceShape g;
    if (spec.is_preset()) {
        check_preset(spec, source_presets(), "g");
        g.eval = [spec](double t, double x) { return eval_source_preset(spec, t, x); };
        g.grid_samples = Field(grid.time_levels(), grid.space_nodes());
        for (std::size_t n = 0; n < grid.time_levels(); ++n) {
            for (std::size_t j = 0; j < grid.space_nodes(); ++j) {
                g.grid_samples(n, j) = eval_source_preset(spec, grid.t(n), grid.x(j));
            }
        }
        return g;
    }
    if (spec.samples2d.rows() != grid.time_levels() || spec.samples2d.cols() != grid.space_nodes()) {
        throw DimensionError("g: sample array does not match the space-time grid");
    }
    g.grid_samples = spec.samples2d;
    return g;
}

Weight materialize_weight(const DataSpec& spec, const SpaceTimeGrid& grid) {
    if (!spec.is_preset()) throw ConfigError("omega must be given as a preset");
    require_params(spec, {"scale", "dilation"}, "omega");
    const double dilation = spec.param("dilation", 1.0);
    if (!(dilation > 0.0)) throw ConfigError("omega dilation must be positive");
    return preset_weight(spec.preset)
        .scaled_amplitude(spec.param("scale", 1.0))
        .dilated(dilation)
        .bound_to(grid);
}

}  // namespace

Problem build_problem(const ProblemSpec& spec) {
    if (spec.coefficients.nonlinearity_power != 1 && spec.coefficients.nonlinearity_power != 2) {
        throw ConfigError("nonlinearity_power must be 1 or 2");
    }
    if (!std::isfinite(spec.coefficients.alpha) || !std::isfinite(spec.coefficients.beta)) {
        throw ConfigError("alpha and beta must be finite");
    }
    if (!(spec.p >= 2.0)) throw ConfigError("norm exponent p must lie in [2, inf]");
    if (!std::isfinite(spec.g0)) throw ConfigError("g0 must be finite");

    Problem pb;
    pb.spec = spec;
    pb.coefficients = spec.coefficients;
    pb.domain = spec.domain;
    pb.grid = SpaceTimeGrid::make(spec.domain, spec.h, spec.tau, spec.T);
    pb.u0 = materialize_space(spec.u0, pb.grid, "u0");
    pb.mu = materialize_time(spec.mu, pb.grid, spec.p, "mu");
    pb.nu = materialize_time(spec.nu, pb.grid, spec.p, "nu");
    pb.phi = materialize_time(spec.phi, pb.grid, spec.p, "phi");
    pb.g = materialize_source(spec.g, pb.grid);
    pb.omega = materialize_weight(spec.omega, pb.grid);
    pb.p = spec.p;
    pb.g0 = spec.g0;
    return pb;
}

Problem with_grid(const Problem& pb, double h, double tau, double T) {
    const ProblemSpec& s = pb.spec;
    for (const DataSpec* d : {&s.u0, &s.mu, &s.nu, &s.g, &s.phi}) {
        if (!d->is_preset()) throw ConfigError("cannot regrid a problem with sampled data");
    }
    ProblemSpec spec = s;
    spec.h = h;
    spec.tau = tau;
    spec.T = T;
    return build_problem(spec);
}

// ---------------------------------------------------------------------------
// Quadrature and norms.

double trapezoid(std::span<const double> values, double h) {
    if (values.size() < 2) return 0.0;
    double s = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
    return s * h;
}

double trapezoid_product(std::span<const double> a, std::span<const double> b, double h) {
    if (a.size() != b.size()) throw DimensionError("trapezoid_product: size mismatch");
    if (a.size() < 2) return 0.0;
    double s = 0.5 * (a.front() * b.front() + a.back() * b.back());
    for (std::size_t i = 1; i + 1 < a.size(); ++i) s += a[i] * b[i];
    return s * h;
}

double l2_norm(std::span<const double> values, double h) {
    return std::sqrt(trapezoid_product(values, values, h));
}

double lp_time_norm(const TimeSignal& s, double p) {
    if (std::isinf(p)) return s.max_abs();
    if (!(p >= 1.0)) throw DomainError("lp_time_norm requires p >= 1");
    if (s.samples.size() < 2) return 0.0;
    const double scale = s.max_abs();
    if (scale == 0.0) return 0.0;
    // Normalize before raising to p to keep large exponents in range.
    std::vector<double> a(s.samples.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::pow(std::abs(s.samples[i]) / scale, p);
    return scale * std::pow(trapezoid(a, s.dt), 1.0 / p);
}

double fractional_sobolev_norm(const TimeSignal& s, double order) {
    if (!(order >= 0.0 && order <= 1.0)) throw DomainError("fractional order must lie in [0, 1]");
    const std::size_t n_nodes = s.samples.size();
    if (n_nodes < 2) return 0.0;
    const std::size_t N = n_nodes - 1;
    const double T = s.dt * static_cast<double>(N);

    // DCT-I is the DFT of the even reflection s_0..s_N, s_{N-1}..s_1 (length 2N).
    std::vector<double> in(s.samples);
    std::vector<double> out(n_nodes);
    fftw_plan raw;
    {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        raw = fftw_plan_r2r_1d(static_cast<int>(n_nodes), in.data(), out.data(), FFTW_REDFT00,
                               FFTW_ESTIMATE);
    }
    detail::FftwPlan plan(raw);
    plan.execute();

    double sum = 0.0;
    for (std::size_t k = 0; k <= N; ++k) {
        const double xi = std::numbers::pi * static_cast<double>(k) / T;
        const double w = std::pow(1.0 + xi * xi, order);
        const double mult = (k == 0 || k == N) ? 1.0 : 2.0;
        sum += mult * w * out[k] * out[k];
    }
    return std::sqrt(sum * s.dt / (4.0 * static_cast<double>(N)));
}

// ---------------------------------------------------------------------------
// Validation.

bool ValidationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

bool ValidationReport::only_hypotheses_failed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const Check& c) { return c.passed || c.hypothesis; });
}

const Check* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        if (!c.passed) {
            os << c.name << " failed (measured " << c.measured << ", threshold " << c.threshold << ")";
            if (!c.detail.empty()) os << ": " << c.detail;
            os << "; ";
        }
    }
    return os.str();
}

namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

ValidationReport validate_problem(const Problem& pb) {
    ValidationReport r;
    const SpaceTimeGrid& grid = pb.grid;

    {
        Check c{"grid"};
        const double span = grid.h * static_cast<double>(grid.n_space);
        const double err_x = std::abs(span - pb.domain.length()) / pb.domain.length();
        const double err_t = std::abs(grid.tau * static_cast<double>(grid.n_time) - grid.T) / grid.T;
        c.measured = std::max(err_x, err_t);
        c.threshold = 1e-9;
        c.passed = c.measured <= c.threshold && pb.u0.size() == grid.space_nodes() &&
                   pb.mu.size() == grid.time_levels() && pb.nu.size() == grid.time_levels() &&
                   pb.phi.size() == grid.time_levels() &&
                   pb.g.grid_samples.rows() == grid.time_levels() &&
                   pb.g.grid_samples.cols() == grid.space_nodes() && pb.omega.is_bound();
        r.checks.push_back(c);
    }
    {
        Check c{"finite_data"};
        c.passed = all_finite(pb.u0) && all_finite(pb.mu.samples) && all_finite(pb.nu.samples) &&
                   all_finite(pb.phi.samples) && all_finite(pb.g.grid_samples.data());
        c.measured = c.passed ? 0.0 : 1.0;
        r.checks.push_back(c);
    }
    {
        Check c{"weight_class"};
        const bool half_line = pb.domain.kind == DomainKind::RightHalfLine;
        if (pb.omega.class_tag() == WeightClass::J_right) {
            const auto d = pb.omega(0.0);
            c.measured = std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])});
            c.threshold = kTraceTolerance;
            c.passed = half_line && c.measured <= c.threshold;
            if (!half_line) c.detail = "J_right weight requires a RightHalfLine domain";
        } else {
            c.passed = !half_line;
            if (half_line) c.detail = "RealLineH5 weight requires a RealLine domain";
        }
        r.checks.push_back(c);
    }
    {
        Check c{"weight_decay"};
        auto right = pb.omega(pb.domain.right());
        double m = 0.0;
        for (double v : right) m = std::max(m, std::abs(v));
        if (pb.domain.kind == DomainKind::RealLine) {
            for (double v : pb.omega(pb.domain.left())) m = std::max(m, std::abs(v));
        }
        c.measured = m;
        c.threshold = kDecayTolerance;
        c.passed = m <= c.threshold;
        r.checks.push_back(c);
    }
    {
        Check c{"weight_h5_finite"};
        double s = 0.0;
        for (int k = 0; k < 6; ++k) {
            const double n = l2_norm(pb.omega.samples(k), grid.h);
            s += n * n;
        }
        c.measured = std::sqrt(s);
        c.passed = std::isfinite(c.measured);
        r.checks.push_back(c);
    }
    {
        Check c{"u0_decay"};
        c.measured = std::abs(pb.u0.back());
        if (pb.domain.kind == DomainKind::RealLine) c.measured = std::max(c.measured, std::abs(pb.u0.front()));
        c.threshold = kDecayTolerance;
        c.passed = c.measured <= c.threshold;
        r.checks.push_back(c);
    }
    {
        Check c{"compatibility"};
        const double q0 = trapezoid_product(pb.u0, pb.omega.samples(0), grid.h);
        c.measured = std::abs(pb.phi.samples.front() - q0);
        c.threshold = 1e-8 * (1.0 + l2_norm(pb.u0, grid.h));
        c.passed = c.measured <= c.threshold;
        r.checks.push_back(c);
    }
    if (pb.domain.kind == DomainKind::RealLine) {
        Check c{"realline_boundary"};
        c.measured = std::max(pb.mu.max_abs(), pb.nu.max_abs());
        c.passed = c.measured == 0.0;
        c.detail = "RealLine problems carry homogeneous closures; mu and nu must vanish";
        r.checks.push_back(c);
    }
    {
        Check c{"g0_positive"};
        c.measured = pb.g0;
        c.passed = pb.g0 > 0.0;
        r.checks.push_back(c);
    }
    {
        Check c{"g1_lower_bound"};
        c.hypothesis = true;
        std::vector<double> wq(grid.space_nodes());
        kernels::trapezoid_weights(grid.space_nodes(), grid.h, wq);
        for (std::size_t j = 0; j < wq.size(); ++j) wq[j] *= pb.omega.samples(0)[j];
        std::vector<double> g1(grid.time_levels());
        kernels::row_dot(pb.g.grid_samples, wq, g1);
        double mn = kInfinity;
        bool pos = false;
        bool neg = false;
        for (double v : g1) {
            mn = std::min(mn, std::abs(v));
            pos = pos || v > 0.0;
            neg = neg || v < 0.0;
        }
        c.measured = mn;
        c.threshold = pb.g0;
        c.passed = mn >= pb.g0 - kTraceTolerance && !(pos && neg);
        if (pos && neg) c.detail = "g1 changes sign";
        r.checks.push_back(c);
    }
    return r;
}

void require_valid(const ValidationReport& report) {
    if (report.passed()) return;
    if (report.only_hypotheses_failed()) throw HypothesisError("hypothesis violated: " + report.summary());
    throw ValidationError("problem validation failed: " + report.summary());
}

}  // namespace kawa
