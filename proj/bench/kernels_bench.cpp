// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <vector>

#include "kawa/field.hpp"
#include "kawa/kernels.hpp"

namespace {

using kawa::Field;
namespace kernels = kawa::kernels;

Field make_field(std::size_t rows, std::size_t cols) {
    Field f(rows, cols);
    for (std::size_t n = 0; n < rows; ++n) {
        for (std::size_t j = 0; j < cols; ++j) f(n, j) = std::sin(0.01 * static_cast<double>(n * cols + j));
    }
    return f;
}

template <auto Kernel>
void bm_row_dot(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Field f = make_field(n, 2001);
    std::vector<double> w(2001, 1e-3), out(n);
    for (auto _ : state) {
        Kernel(f, w, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <auto Kernel>
void bm_flux(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> u(n), out(n - 2);
    for (std::size_t j = 0; j < n; ++j) u[j] = std::exp(-1e-3 * static_cast<double>(j));
    for (auto _ : state) {
        Kernel(u, 2, 0.02, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <auto Kernel>
void bm_spectrum(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<std::complex<double>> s(n * n);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = {std::cos(0.1 * static_cast<double>(i)), 0.5};
    const kernels::SpectrumLayout layout{n, n, 0.1, 0.1};
    const kernels::SpectralWeight weight = [](double tau, double xi) {
        return std::pow(1.0 + std::abs(tau - std::pow(xi, 5)), 0.9);
    };
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(s, layout, weight));
}

}  // namespace

BENCHMARK(bm_row_dot<kernels::serial::row_dot>)->Name("row_dot/serial")->Arg(500)->Arg(2000);
BENCHMARK(bm_row_dot<kernels::parallel::row_dot>)->Name("row_dot/parallel")->Arg(500)->Arg(2000);
BENCHMARK(bm_flux<kernels::serial::flux_derivative>)->Name("flux_derivative/serial")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(bm_flux<kernels::parallel::flux_derivative>)->Name("flux_derivative/parallel")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(bm_spectrum<kernels::serial::weighted_spectrum_sum>)->Name("weighted_spectrum_sum/serial")->Arg(128)->Arg(512);
BENCHMARK(bm_spectrum<kernels::parallel::weighted_spectrum_sum>)->Name("weighted_spectrum_sum/parallel")->Arg(128)->Arg(512);

BENCHMARK_MAIN();
