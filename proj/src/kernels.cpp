#include "kawa/kernels.hpp"

#include <cassert>
#include <cmath>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace kawa::kernels {

namespace {
// Below these sizes the thread start-up cost dominates.
constexpr std::size_t kParallelRowThreshold = 64;
constexpr std::size_t kParallelSpectrumThreshold = 1 << 14;
constexpr std::size_t kParallelFluxThreshold = 1 << 15;

inline double flux(double u, int power) {
    return power == 1 ? 0.5 * u * u : u * u * u / 3.0;
}
}  // namespace

void trapezoid_weights(std::size_t nodes, double h, std::span<double> out) {
    assert(out.size() == nodes);
    for (std::size_t j = 0; j < nodes; ++j) out[j] = h;
    if (nodes > 0) {
        out[0] = 0.5 * h;
        out[nodes - 1] = 0.5 * h;
    }
}

double SpectrumLayout::tau(std::size_t r) const {
    const auto n = static_cast<long long>(rows);
    auto k = static_cast<long long>(r);
    if (k > n / 2) k -= n;
    return d_tau * static_cast<double>(k);
}

double SpectrumLayout::xi(std::size_t c) const {
    const auto n = static_cast<long long>(cols);
    auto k = static_cast<long long>(c);
    if (k > n / 2) k -= n;
    return d_xi * static_cast<double>(k);
}

namespace serial {

void row_dot(const Field& field, std::span<const double> w, std::span<double> out) {
    assert(w.size() == field.cols() && out.size() == field.rows());
    for (std::size_t n = 0; n < field.rows(); ++n) {
        auto r = field.row(n);
        double s = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) s += w[j] * r[j];
        out[n] = s;
    }
}

double weighted_spectrum_sum(std::span<const std::complex<double>> spectrum,
                             const SpectrumLayout& layout, const SpectralWeight& weight) {
    assert(spectrum.size() == layout.rows * layout.cols);
    // Row-wise partial sums, same association as the parallel kernel.
    double total = 0.0;
    for (std::size_t r = 0; r < layout.rows; ++r) {
        const double tau = layout.tau(r);
        double s = 0.0;
        for (std::size_t c = 0; c < layout.cols; ++c) {
            s += weight(tau, layout.xi(c)) * std::norm(spectrum[r * layout.cols + c]);
        }
        total += s;
    }
    return total;
}

void flux_derivative(std::span<const double> u, int power, double h, std::span<double> out) {
    // out[i] corresponds to node i+1; u has nodes 0..N, beyond N is zero.
    const std::size_t last = u.size() - 1;
    assert(out.size() == last - 1);
    const double inv = 1.0 / (2.0 * h);
    for (std::size_t j = 1; j < last; ++j) {
        out[j - 1] = (flux(u[j + 1], power) - flux(u[j - 1], power)) * inv;
    }
}

}  // namespace serial

namespace parallel {

void row_dot(const Field& field, std::span<const double> w, std::span<double> out) {
    assert(w.size() == field.cols() && out.size() == field.rows());
    const auto rows = static_cast<long long>(field.rows());
    const std::size_t cols = field.cols();
#pragma omp parallel for schedule(static)
    for (long long n = 0; n < rows; ++n) {
        auto r = field.row(static_cast<std::size_t>(n));
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += w[j] * r[j];
        out[static_cast<std::size_t>(n)] = s;
    }
}

double weighted_spectrum_sum(std::span<const std::complex<double>> spectrum,
                             const SpectrumLayout& layout, const SpectralWeight& weight) {
    assert(spectrum.size() == layout.rows * layout.cols);
    const auto rows = static_cast<long long>(layout.rows);
    // Per-row partial sums keep the reduction order independent of the
    // thread count.
    std::vector<double> partial(layout.rows, 0.0);
#pragma omp parallel for schedule(static)
    for (long long r = 0; r < rows; ++r) {
        const auto ru = static_cast<std::size_t>(r);
        const double tau = layout.tau(ru);
        double s = 0.0;
        for (std::size_t c = 0; c < layout.cols; ++c) {
            s += weight(tau, layout.xi(c)) * std::norm(spectrum[ru * layout.cols + c]);
        }
        partial[ru] = s;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

void flux_derivative(std::span<const double> u, int power, double h, std::span<double> out) {
    const auto last = static_cast<long long>(u.size() - 1);
    assert(static_cast<long long>(out.size()) == last - 1);
    const double inv = 1.0 / (2.0 * h);
#pragma omp parallel for simd schedule(static)
    for (long long j = 1; j < last; ++j) {
        out[static_cast<std::size_t>(j - 1)] =
            (flux(u[static_cast<std::size_t>(j + 1)], power) -
             flux(u[static_cast<std::size_t>(j - 1)], power)) *
            inv;
    }
}

}  // namespace parallel

void row_dot(const Field& field, std::span<const double> w, std::span<double> out) {
    if (field.rows() >= kParallelRowThreshold && max_threads() > 1) {
        parallel::row_dot(field, w, out);
    } else {
        serial::row_dot(field, w, out);
    }
}

double weighted_spectrum_sum(std::span<const std::complex<double>> spectrum,
                             const SpectrumLayout& layout, const SpectralWeight& weight) {
    if (spectrum.size() >= kParallelSpectrumThreshold && max_threads() > 1) {
        return parallel::weighted_spectrum_sum(spectrum, layout, weight);
    }
    return serial::weighted_spectrum_sum(spectrum, layout, weight);
}

void flux_derivative(std::span<const double> u, int power, double h, std::span<double> out) {
    if (u.size() >= kParallelFluxThreshold && max_threads() > 1) {
        parallel::flux_derivative(u, power, h, out);
    } else {
        serial::flux_derivative(u, power, h, out);
    }
}

int max_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace kawa::kernels
