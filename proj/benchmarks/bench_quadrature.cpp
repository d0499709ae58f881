#include <benchmark/benchmark.h>

#include <complex>

#include "dipolerad/numerics.hpp"
#include "dipolerad/quadrature.hpp"
#include "dipolerad/special_functions.hpp"

using namespace dipolerad;
using cd = std::complex<double>;

namespace {

QuadratureSpec unit_spec() {
  QuadratureSpec s;
  s.cutoff = 100.0;
  s.epsilon = 1e-3;
  return s;
}

void BM_f_kernel(benchmark::State& state) {
  double w = 0.37;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f_kernel(w, 3.1));
    w += 1e-9;
  }
}
BENCHMARK(BM_f_kernel);

void BM_gauss_legendre_nodes(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gauss_legendre(n));
}
BENCHMARK(BM_gauss_legendre_nodes)->Arg(16)->Arg(64);

void BM_sine_cosine_integral(benchmark::State& state) {
  double x = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sine_cosine_integral(x));
    x = x < 400.0 ? x + 0.37 : 0.5;
  }
}
BENCHMARK(BM_sine_cosine_integral);

void BM_exp_e1_scaled(benchmark::State& state) {
  const double im = static_cast<double>(state.range(0));
  cd z{-0.05, im};
  for (auto _ : state) {
    benchmark::DoNotOptimize(exp_e1_scaled(z));
    z += cd(0.0, 1e-6);
  }
}
BENCHMARK(BM_exp_e1_scaled)->Arg(2)->Arg(20)->Arg(2000);

void BM_pv_delta_integral(benchmark::State& state) {
  const auto spec = unit_spec();
  auto w4 = [](double w) { return w * w * w * w; };
  for (auto _ : state) benchmark::DoNotOptimize(pv_delta_integral(1.0, w4, spec));
}
BENCHMARK(BM_pv_delta_integral);

void BM_oscillatory_integral(benchmark::State& state) {
  const auto spec = unit_spec();
  const double t = static_cast<double>(state.range(0));
  auto g = [&](double w) { return std::exp(cd(0.0, -w * t)); };
  for (auto _ : state) benchmark::DoNotOptimize(regulated_oscillatory_integral(g, t, spec));
}
BENCHMARK(BM_oscillatory_integral)->Arg(1)->Arg(30);

void BM_pole_phase_integral(benchmark::State& state) {
  const double t = static_cast<double>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(pole_phase_integral(-1.0, 99.0, 1e-3, t));
}
BENCHMARK(BM_pole_phase_integral)->Arg(1)->Arg(1000);

}  // namespace
