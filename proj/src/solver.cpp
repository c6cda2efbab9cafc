#include "kawa/solver.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <tuple>

#include "kawa/error.hpp"
#include "kawa/kernels.hpp"

namespace kawa {

// ---------------------------------------------------------------------------
// Forcing.

Forcing Forcing::from_pair(const TimeSignal& f0, const SourceShape& g) {
    const Field& gs = g.grid_samples;
    if (f0.size() != gs.rows()) throw DimensionError("f0 length does not match g time levels");
    Forcing f;
    f.f1 = Field(gs.rows(), gs.cols());
    for (std::size_t n = 0; n < gs.rows(); ++n) {
        for (std::size_t j = 0; j < gs.cols(); ++j) f.f1(n, j) = f0.samples[n] * gs(n, j);
    }
    f.description = "f0(t) g(t,x)";
    return f;
}

Field Forcing::f2_derivative(const SpaceTimeGrid& grid) const {
    if (!has_f2()) return {};
    if (!f2x.empty()) return f2x;
    const std::size_t nodes = f2.cols();
    Field d(f2.rows(), nodes);
    const double inv = 1.0 / (2.0 * grid.h);
    for (std::size_t n = 0; n < f2.rows(); ++n) {
        for (std::size_t j = 1; j + 1 < nodes; ++j) d(n, j) = (f2(n, j + 1) - f2(n, j - 1)) * inv;
        d(n, 0) = (-3.0 * f2(n, 0) + 4.0 * f2(n, 1) - f2(n, 2)) * inv;
        d(n, nodes - 1) = (3.0 * f2(n, nodes - 1) - 4.0 * f2(n, nodes - 2) + f2(n, nodes - 3)) * inv;
    }
    return d;
}

Field Forcing::nodal_total(const SpaceTimeGrid& grid) const {
    Field total;
    if (!f1.empty()) total = f1;
    if (has_f2()) {
        Field d = f2_derivative(grid);
        if (total.empty()) {
            total = std::move(d);
        } else {
            total += d;
        }
    }
    if (!total.empty() &&
        (total.rows() != grid.time_levels() || total.cols() != grid.space_nodes())) {
        throw DimensionError("forcing does not match the space-time grid");
    }
    return total;
}

Forcing Forcing::negated() const {
    Forcing f = *this;
    if (!f.f1.empty()) f.f1 *= -1.0;
    if (!f.f2.empty()) f.f2 *= -1.0;
    if (!f.f2x.empty()) f.f2x *= -1.0;
    if (!f.step_source.empty()) f.step_source *= -1.0;
    f.description = "-(" + description + ")";
    return f;
}

double Trajectory::sup_l2() const {
    double m = 0.0;
    for (std::size_t n = 0; n < values.rows(); ++n) m = std::max(m, l2_norm(values.row(n), grid.h));
    return m;
}

// ---------------------------------------------------------------------------
// Discrete operator.

namespace {

constexpr double kD1[] = {-0.5, 0.0, 0.5};
constexpr double kD3[] = {-0.5, 1.0, 0.0, -1.0, 0.5};
constexpr double kD5[] = {-0.5, 2.0, -2.5, 0.0, 2.5, -2.0, 0.5};
// Fifth derivative on offsets -2..4, second order.
constexpr double kD5Biased[] = {-1.5, 8.0, -17.5, 20.0, -12.5, 4.0, -0.5};

constexpr int kBandWidth = KawaharaOperator::kLower + KawaharaOperator::kUpper + 1;

}  // namespace

KawaharaOperator::KawaharaOperator(const Coefficients& coefficients, const SpaceTimeGrid& grid)
    : coefficients_(coefficients), grid_(grid) {
    const auto N = static_cast<long>(grid.n_space);
    if (N < 8) throw DimensionError("need at least 8 spatial intervals");
    n_ = static_cast<std::size_t>(N - 1);
    band_.assign(n_ * kBandWidth, 0.0);
    b_mu_.assign(n_, 0.0);
    b_nu_.assign(n_, 0.0);

    const double h = grid.h;
    const double c1 = coefficients.alpha / h;
    const double c3 = coefficients.beta / (h * h * h);
    const double c5 = 1.0 / (h * h * h * h * h);

    for (long j = 1; j < N; ++j) {
        const auto i = static_cast<std::size_t>(j - 1);
        std::map<long, double> row;  // node -> coefficient of L
        for (int o = -1; o <= 1; ++o) row[j + o] += c1 * kD1[o + 1];
        for (int o = -2; o <= 2; ++o) row[j + o] += c3 * kD3[o + 2];
        if (j == 1) {
            for (int o = -2; o <= 4; ++o) row[j + o] -= c5 * kD5Biased[o + 2];
        } else {
            for (int o = -3; o <= 3; ++o) row[j + o] -= c5 * kD5[o + 3];
        }
        for (const auto& [node, v] : row) {
            if (node == -1) {
                // u_{-1} = u_1 - 2 h nu
                band_[i * kBandWidth + static_cast<std::size_t>(0 - static_cast<long>(i) + kLower)] += v;
                b_nu_[i] += -2.0 * h * v;
            } else if (node == 0) {
                b_mu_[i] += v;
            } else if (node >= N) {
                // zero beyond the right end
            } else if (node < -1) {
                throw ContractError("stencil reaches past the single left ghost");
            } else {
                const long off = (node - 1) - static_cast<long>(i);
                band_[i * kBandWidth + static_cast<std::size_t>(off + kLower)] += v;
            }
        }
    }

    // LAPACK band storage of A = I + tau/2 M with room for fill-in.
    const int kl = kLower;
    const int ku = kUpper;
    const int ldab = 2 * kl + ku + 1;
    lu_.assign(static_cast<std::size_t>(ldab) * n_, 0.0);
    const double half_tau = 0.5 * grid.tau;
    double anorm = 0.0;
    std::vector<double> colsum(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        for (int off = -kl; off <= ku; ++off) {
            const long col = static_cast<long>(i) + off;
            if (col < 0 || col >= static_cast<long>(n_)) continue;
            double a = half_tau * band_[i * kBandWidth + static_cast<std::size_t>(off + kl)];
            if (off == 0) a += 1.0;
            lu_[static_cast<std::size_t>(kl + ku + static_cast<long>(i) - col) +
                static_cast<std::size_t>(col) * ldab] = a;
            colsum[static_cast<std::size_t>(col)] += std::abs(a);
        }
    }
    for (double s : colsum) anorm = std::max(anorm, s);

    pivots_.assign(n_, 0);
    const auto ni = static_cast<lapack_int>(n_);
    lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, ni, ni, kl, ku, lu_.data(), ldab, pivots_.data());
    if (info != 0) {
        throw SolverError("banded step matrix is singular (dgbtrf info " + std::to_string(info) + ")", 0.0);
    }
    info = LAPACKE_dgbcon(LAPACK_COL_MAJOR, '1', ni, kl, ku, lu_.data(), ldab, pivots_.data(), anorm,
                          &rcond_);
    if (info != 0 || !(rcond_ > 1e3 * std::numeric_limits<double>::epsilon())) {
        std::ostringstream os;
        os << "banded step matrix is numerically singular (rcond " << rcond_ << ")";
        throw SolverError(os.str(), rcond_);
    }
}

void KawaharaOperator::apply(std::span<const double> u, std::span<double> out) const {
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        const double* r = &band_[i * kBandWidth];
        for (int off = -kLower; off <= kUpper; ++off) {
            const long col = static_cast<long>(i) + off;
            if (col < 0 || col >= static_cast<long>(n_)) continue;
            s += r[off + kLower] * u[static_cast<std::size_t>(col)];
        }
        out[i] = s;
    }
}

void KawaharaOperator::apply_transpose(std::span<const double> w, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const double* r = &band_[i * kBandWidth];
        for (int off = -kLower; off <= kUpper; ++off) {
            const long col = static_cast<long>(i) + off;
            if (col < 0 || col >= static_cast<long>(n_)) continue;
            out[static_cast<std::size_t>(col)] += r[off + kLower] * w[i];
        }
    }
}

void KawaharaOperator::solve_step(std::span<double> rhs) const {
    const int ldab = 2 * kLower + kUpper + 1;
    const auto ni = static_cast<lapack_int>(n_);
    const lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', ni, kLower, kUpper, 1, lu_.data(),
                                           ldab, pivots_.data(), rhs.data(), ni);
    if (info != 0) throw SolverError("dgbtrs failed", rcond_);
}

std::shared_ptr<const KawaharaOperator> operator_for(const Coefficients& coefficients,
                                                     const SpaceTimeGrid& grid) {
    using Key = std::tuple<double, double, double, double, std::size_t>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const KawaharaOperator>> cache;
    constexpr std::size_t kMaxEntries = 16;

    // The nonlinearity power does not enter the linear operator.
    const Key key{coefficients.alpha, coefficients.beta, grid.h, grid.tau, grid.n_space};
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto op = std::make_shared<const KawaharaOperator>(coefficients, grid);
    std::lock_guard<std::mutex> lock(mutex);
    if (cache.size() >= kMaxEntries) cache.clear();
    cache.emplace(key, op);
    return op;
}

// ---------------------------------------------------------------------------
// Time stepping.

namespace {

void flux_into(std::span<const double> u_full, int power, double h, std::span<double> out) {
    kernels::flux_derivative(u_full, power, h, out);
}

Trajectory integrate(const Problem& pb, std::span<const double> u0, const TimeSignal& mu,
                     const TimeSignal& nu, const Forcing& forcing, bool nonlinear) {
    const SpaceTimeGrid& grid = pb.grid;
    if (u0.size() != grid.space_nodes()) throw DimensionError("u0 does not match the grid");
    if (mu.size() != grid.time_levels() || nu.size() != grid.time_levels()) {
        throw DimensionError("boundary data do not match the time grid");
    }
    if (!forcing.step_source.empty() &&
        (forcing.step_source.rows() != grid.n_time || forcing.step_source.cols() != grid.space_nodes())) {
        throw DimensionError("step source does not match the grid");
    }
    auto op = operator_for(pb.coefficients, grid);
    const std::size_t N = grid.n_space;
    const std::size_t n = op->interior_size();
    const double tau = grid.tau;
    const double h = grid.h;
    const int power = pb.coefficients.nonlinearity_power;

    const Field F = forcing.nodal_total(grid);
    const auto b_mu = op->mu_column();
    const auto b_nu = op->nu_column();

    Trajectory traj;
    traj.grid = grid;
    traj.domain = pb.domain;
    traj.coefficients = pb.coefficients;
    traj.mu = mu;
    traj.nu = nu;
    traj.forcing_record = forcing.description;
    traj.forcing_has_f2 = forcing.has_f2();
    traj.nonlinear = nonlinear;
    traj.values = Field(grid.time_levels(), grid.space_nodes());
    std::copy(u0.begin(), u0.end(), traj.values.row(0).begin());

    double scale = 0.0;
    for (double v : u0) scale = std::max(scale, std::abs(v));
    scale = std::max({scale, mu.max_abs(), nu.max_abs(), grid.T * F.max_abs(),
                      grid.T * forcing.step_source.max_abs()});
    if (scale == 0.0) scale = 1.0;
    const double blowup = 1e6 * scale;

    std::vector<double> rhs(n), mu_part(n), flux_now(n), flux_prev(n), flux_next(n), base(n);

    for (std::size_t s = 0; s < grid.n_time; ++s) {
        auto cur = traj.values.row(s);
        std::span<const double> cur_int(cur.data() + 1, n);
        op->apply(cur_int, mu_part);
        const double mu_sum = mu.samples[s] + mu.samples[s + 1];
        const double nu_sum = nu.samples[s] + nu.samples[s + 1];
        for (std::size_t i = 0; i < n; ++i) {
            base[i] = cur_int[i] - 0.5 * tau * mu_part[i] - 0.5 * tau * (b_mu[i] * mu_sum + b_nu[i] * nu_sum);
        }
        if (!F.empty()) {
            auto a = F.row(s);
            auto b = F.row(s + 1);
            for (std::size_t i = 0; i < n; ++i) base[i] += 0.5 * tau * (a[i + 1] + b[i + 1]);
        }
        if (!forcing.step_source.empty()) {
            auto src = forcing.step_source.row(s);
            for (std::size_t i = 0; i < n; ++i) base[i] += tau * src[i + 1];
        }

        auto next = traj.values.row(s + 1);
        next[0] = mu.samples[s + 1];
        next[N] = 0.0;

        if (!nonlinear) {
            rhs = base;
            op->solve_step(rhs);
            std::copy(rhs.begin(), rhs.end(), next.begin() + 1);
        } else if (s >= 1) {
            flux_into(cur, power, h, flux_now);
            flux_into(traj.values.row(s - 1), power, h, flux_prev);
            for (std::size_t i = 0; i < n; ++i) rhs[i] = base[i] - tau * (1.5 * flux_now[i] - 0.5 * flux_prev[i]);
            op->solve_step(rhs);
            std::copy(rhs.begin(), rhs.end(), next.begin() + 1);
        } else {
            // First step: trapezoidal average of the flux, resolved by fixed point.
            flux_into(cur, power, h, flux_now);
            flux_next = flux_now;
            for (int it = 0; it < 100; ++it) {
                for (std::size_t i = 0; i < n; ++i) {
                    rhs[i] = base[i] - 0.5 * tau * (flux_now[i] + flux_next[i]);
                }
                op->solve_step(rhs);
                double change = 0.0;
                double size = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    change = std::max(change, std::abs(rhs[i] - next[i + 1]));
                    size = std::max(size, std::abs(rhs[i]));
                }
                std::copy(rhs.begin(), rhs.end(), next.begin() + 1);
                flux_into(next, power, h, flux_next);
                if (change <= 1e-15 * std::max(size, 1e-300)) break;
            }
            // Final pass so the stored state is consistent with flux_next.
            for (std::size_t i = 0; i < n; ++i) rhs[i] = base[i] - 0.5 * tau * (flux_now[i] + flux_next[i]);
            op->solve_step(rhs);
            std::copy(rhs.begin(), rhs.end(), next.begin() + 1);
        }

        double m = 0.0;
        for (double v : next) m = std::max(m, std::abs(v));
        if (!std::isfinite(m)) {
            throw DivergenceError("non-finite solution at step " + std::to_string(s + 1), s + 1);
        }
        if (nonlinear && m > blowup) {
            throw DivergenceError("solution blew up at step " + std::to_string(s + 1), s + 1);
        }
    }
    return traj;
}

}  // namespace

Trajectory solve_linear(const Problem& pb, std::span<const double> u0, const TimeSignal& mu,
                        const TimeSignal& nu, const Forcing& forcing) {
    return integrate(pb, u0, mu, nu, forcing, false);
}

Trajectory solve_linear(const Problem& pb, const Forcing& forcing) {
    return integrate(pb, pb.u0, pb.mu, pb.nu, forcing, false);
}

Trajectory solve_nonlinear(const Problem& pb, const Forcing& forcing) {
    return integrate(pb, pb.u0, pb.mu, pb.nu, forcing, true);
}

Field explicit_flux_sources(const Field& v, int power, double h) {
    const std::size_t levels = v.rows();
    const std::size_t nodes = v.cols();
    if (levels < 2) throw DimensionError("explicit_flux_sources needs at least two time levels");
    Field src(levels - 1, nodes);
    std::vector<double> now(nodes - 2), prev(nodes - 2), next(nodes - 2);
    for (std::size_t s = 0; s + 1 < levels; ++s) {
        auto row = src.row(s);
        if (s == 0) {
            flux_into(v.row(0), power, h, now);
            flux_into(v.row(1), power, h, next);
            for (std::size_t i = 0; i < now.size(); ++i) row[i + 1] = -0.5 * (now[i] + next[i]);
        } else {
            flux_into(v.row(s), power, h, now);
            flux_into(v.row(s - 1), power, h, prev);
            for (std::size_t i = 0; i < now.size(); ++i) row[i + 1] = -(1.5 * now[i] - 0.5 * prev[i]);
        }
    }
    return src;
}

double energy_residual(const Trajectory& traj, const Forcing& forcing) {
    const SpaceTimeGrid& grid = traj.grid;
    if (traj.mu.max_abs() != 0.0 || traj.nu.max_abs() != 0.0) {
        throw PreconditionError("energy_residual requires homogeneous boundary data");
    }
    for (double v : traj.values.row(0)) {
        if (v != 0.0) throw PreconditionError("energy_residual requires zero initial data");
    }
    const Field F = forcing.nodal_total(grid);
    double work = 0.0;  // 2 int_0^t int f u
    double worst = -kInfinity;
    auto nodal_work = [&](std::size_t n) {
        return F.empty() ? 0.0 : trapezoid_product(F.row(n), traj.values.row(n), grid.h);
    };
    double prev = nodal_work(0);
    worst = std::max(worst, 0.0);
    std::vector<double> avg(grid.space_nodes());
    for (std::size_t n = 0; n < grid.n_time; ++n) {
        const double cur = nodal_work(n + 1);
        work += grid.tau * (prev + cur);  // 2 * trapezoid
        if (!forcing.step_source.empty()) {
            auto a = traj.values.row(n);
            auto b = traj.values.row(n + 1);
            for (std::size_t j = 0; j < avg.size(); ++j) avg[j] = 0.5 * (a[j] + b[j]);
            work += 2.0 * grid.tau * trapezoid_product(forcing.step_source.row(n), avg, grid.h);
        }
        prev = cur;
        const double energy = trapezoid_product(traj.values.row(n + 1), traj.values.row(n + 1), grid.h);
        worst = std::max(worst, energy - work);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Well-posedness ratio.

RatioStatistics RatioStatistics::from(std::vector<double> values) {
    RatioStatistics r;
    r.values = values;
    if (values.empty()) return r;
    std::sort(values.begin(), values.end());
    r.min = values.front();
    r.max = values.back();
    const std::size_t m = values.size() / 2;
    r.median = values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
    double s = 0.0;
    for (double v : values) s += v;
    r.mean = s / static_cast<double>(values.size());
    return r;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double wellposedness_ratio_single(const Problem& pb, std::span<const double> u0,
                                  const TimeSignal& mu, const TimeSignal& nu,
                                  const Forcing& forcing) {
    const SpaceTimeGrid& grid = pb.grid;
    const Field F = forcing.nodal_total(grid);
    double f_l2l2 = 0.0;
    if (!F.empty()) {
        std::vector<double> row_sq(grid.time_levels());
        for (std::size_t n = 0; n < grid.time_levels(); ++n) {
            row_sq[n] = trapezoid_product(F.row(n), F.row(n), grid.h);
        }
        f_l2l2 = std::sqrt(trapezoid(row_sq, grid.tau));
    }
    const double denom = l2_norm(u0, grid.h) + fractional_sobolev_norm(mu, 0.4) +
                         fractional_sobolev_norm(nu, 0.2) + f_l2l2;
    if (denom == 0.0) return 0.0;
    const Trajectory traj = solve_linear(pb, u0, mu, nu, forcing);
    return traj.sup_l2() / denom;
}

RatioStatistics wellposedness_ratio(const Problem& base, int ensemble_size, std::uint64_t seed) {
    if (ensemble_size < 1) throw DomainError("ensemble_size must be >= 1");
    const SpaceTimeGrid& grid = base.grid;
    // Factor once before the parallel region.
    operator_for(base.coefficients, grid);

    std::vector<double> ratios(static_cast<std::size_t>(ensemble_size), 0.0);
    std::vector<std::string> errors(ratios.size());
    const double T = grid.T;
    const double x0 = base.domain.left();
    const double span = base.domain.length();

#pragma omp parallel for schedule(dynamic)
    for (int m = 0; m < ensemble_size; ++m) {
        try {
            std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            auto uni = [&](double a, double b) { return a + (b - a) * unit(rng); };

            const double a_u = uni(-1.0, 1.0), c_u = x0 + uni(0.1, 0.2) * span, w_u = uni(0.6, 1.2);
            const double a_mu = uni(-1.0, 1.0), k_mu = uni(1.0, 4.0);
            const double a_nu = uni(-1.0, 1.0), k_nu = uni(1.0, 4.0);
            const double a_f = uni(-1.0, 1.0), c_f = x0 + uni(0.1, 0.25) * span, w_f = uni(0.5, 1.5),
                         k_f = uni(0.0, 6.0);
            const bool half_line = base.domain.kind == DomainKind::RightHalfLine;

            std::vector<double> u0(grid.space_nodes());
            for (std::size_t j = 0; j < u0.size(); ++j) {
                const double z = (grid.x(j) - c_u) / w_u;
                u0[j] = a_u * std::exp(-z * z);
            }
            TimeSignal mu = TimeSignal::zeros(grid), nu = TimeSignal::zeros(grid);
            if (half_line) {
                for (std::size_t n = 0; n < grid.time_levels(); ++n) {
                    const double t = grid.t(n);
                    const double ramp = std::sin(3.14159265358979323846 * t / (2.0 * T));
                    mu.samples[n] = a_mu * ramp * ramp * std::cos(k_mu * t);
                    nu.samples[n] = a_nu * ramp * ramp * std::sin(k_nu * t + 0.3);
                }
            }
            Forcing f;
            f.f1 = Field(grid.time_levels(), grid.space_nodes());
            for (std::size_t n = 0; n < grid.time_levels(); ++n) {
                const double amp = a_f * (1.0 + 0.5 * std::sin(k_f * grid.t(n)));
                for (std::size_t j = 0; j < grid.space_nodes(); ++j) {
                    const double z = (grid.x(j) - c_f) / w_f;
                    f.f1(n, j) = amp * std::exp(-z * z);
                }
            }
            f.description = "random ensemble member";
            ratios[static_cast<std::size_t>(m)] = wellposedness_ratio_single(base, u0, mu, nu, f);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(m)] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw SolverError("ensemble member failed: " + e, 0.0);
    }
    return RatioStatistics::from(std::move(ratios));
}

}  // namespace kawa
