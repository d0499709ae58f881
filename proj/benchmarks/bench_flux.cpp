#include <benchmark/benchmark.h>

#include "dipolerad/flux_engine.hpp"

using namespace dipolerad;
using cd = std::complex<double>;

namespace {

DipoleSpectrum two_level_unit() {
  RawSpectrum raw;
  raw.levels = {{"g", 0.0}, {"e", 1.0}};
  raw.dipoles = {{"e", "g", CVec3{cd(0), cd(0), cd(1)}}};
  raw.excited = "e";
  return DipoleSpectrum::validate(raw);
}

void BM_polarization_sum(benchmark::State& state) {
  const CVec3 d{cd(0.2, 0.4), cd(0.0, 0.7), cd(0.5, 0.0)};
  Vec3 n{0.3, -0.5, 0.81};
  n = n / norm(n);
  for (auto _ : state) benchmark::DoNotOptimize(polarization_sum(d, n));
}
BENCHMARK(BM_polarization_sum);

void BM_sphere_flux_density(benchmark::State& state) {
  const auto s = two_level_unit();
  const auto grid = SphericalGrid::product_gauss(static_cast<int>(state.range(0)),
                                                 2 * static_cast<int>(state.range(0)));
  const auto spec = QuadratureSpec::defaults_for(s);
  for (auto _ : state) benchmark::DoNotOptimize(total_real_flux(s, grid, spec));
}
BENCHMARK(BM_sphere_flux_density)->Arg(16)->Arg(32);

void BM_virtual_flux_sample(benchmark::State& state) {
  const auto s = two_level_unit();
  const auto grid = SphericalGrid::product_gauss(16, 32);
  const auto spec = QuadratureSpec::defaults_for(s);
  double t = 1.0 + static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(virtual_flux(s, 1.0, t, grid, spec));
    t += 1e-6;
  }
}
BENCHMARK(BM_virtual_flux_sample)->Arg(1)->Arg(1000);

void BM_second_order_integrand(benchmark::State& state) {
  double w = 0.21;
  for (auto _ : state) {
    benchmark::DoNotOptimize(second_order_integrand(w, 1.0, 7.3));
    w += 1e-9;
  }
}
BENCHMARK(BM_second_order_integrand);

}  // namespace
