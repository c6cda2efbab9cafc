#pragma once

// Data-parallel inner loops. Each kernel has a serial reference version and an
// OpenMP version; the two must agree to round-off (checked in tests, compared
// in bench/).

#include <complex>
#include <cstddef>
#include <functional>
#include <span>

#include "kawa/field.hpp"

namespace kawa::kernels {

/// Composite trapezoid weights for n+1 nodes with spacing h.
void trapezoid_weights(std::size_t nodes, double h, std::span<double> out);

/// Spectral weight evaluated at (temporal frequency, spatial frequency).
using SpectralWeight = std::function<double(double tau, double xi)>;

/// Layout of a 2-D spectrum stored row-major: rows index temporal frequency,
/// columns spatial frequency, in FFT order.
struct SpectrumLayout {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double d_tau = 0.0;  ///< temporal frequency spacing
    double d_xi = 0.0;   ///< spatial frequency spacing

    double tau(std::size_t r) const;
    double xi(std::size_t c) const;
};

namespace serial {

/// out[n] = sum_j w[j] * field(n, j): the per-time-level quadrature of a
/// space-time array against precomputed quadrature-times-weight values.
void row_dot(const Field& field, std::span<const double> w, std::span<double> out);

/// sum over the lattice of weight(tau, xi) * |spectrum|^2.
double weighted_spectrum_sum(std::span<const std::complex<double>> spectrum,
                             const SpectrumLayout& layout, const SpectralWeight& weight);

/// Conservative centered flux difference (u^{p+1}/(p+1))_x at nodes
/// 1..n-1 of a full nodal vector, written to out[0..n-2]. power is 1 or 2.
void flux_derivative(std::span<const double> u, int power, double h, std::span<double> out);

}  // namespace serial

namespace parallel {

void row_dot(const Field& field, std::span<const double> w, std::span<double> out);

double weighted_spectrum_sum(std::span<const std::complex<double>> spectrum,
                             const SpectrumLayout& layout, const SpectralWeight& weight);

void flux_derivative(std::span<const double> u, int power, double h, std::span<double> out);

}  // namespace parallel

/// Dispatchers used by the library: the OpenMP kernel above a size threshold,
/// the serial one below.
void row_dot(const Field& field, std::span<const double> w, std::span<double> out);
double weighted_spectrum_sum(std::span<const std::complex<double>> spectrum,
                             const SpectrumLayout& layout, const SpectralWeight& weight);
void flux_derivative(std::span<const double> u, int power, double h, std::span<double> out);

/// Number of OpenMP threads available (1 without OpenMP).
int max_threads();

}  // namespace kawa::kernels
