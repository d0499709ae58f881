#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "dipolerad/flux_engine.hpp"
#include "dipolerad/numerics.hpp"

using namespace dipolerad;
using cd = std::complex<double>;

namespace {

const double kPi = std::numbers::pi;

DipoleSpectrum two_level_unit() {
  RawSpectrum raw;
  raw.levels = {{"g", 0.0}, {"e", 1.0}};
  raw.dipoles = {{"e", "g", CVec3{cd(0), cd(0), cd(1)}}};
  raw.excited = "e";
  return DipoleSpectrum::validate(raw);
}

DipoleSpectrum three_level_with_upward() {
  RawSpectrum raw;
  raw.levels = {{"g", 0.0}, {"e", 1.0}, {"u", 1.6}};
  raw.dipoles = {{"e", "g", CVec3{cd(0), cd(0), cd(1)}},
                 {"e", "u", CVec3{cd(0.8), cd(0), cd(0.3)}}};
  raw.excited = "e";
  return DipoleSpectrum::validate(raw);
}

// brute-force oracle for the oscillatory frequency kernel: resolves the
// Lorentzian-smoothed poles and the oscillation with graded Simpson panels
cd brute_virtual_kernel(double omega_em, double t_r, const QuadratureSpec& spec) {
  const double Om = spec.cutoff;
  const double eps = spec.epsilon;
  auto integrand = [&](double w) {
    return w * w * spec.regulator(w) *
           (std::exp(cd(0.0, -(w - omega_em) * t_r)) / cd(w - omega_em, eps) -
            std::exp(cd(0.0, -(w + omega_em) * t_r)) / cd(w + omega_em, eps));
  };
  // breakpoints: uniform oscillation-resolving grid plus geometric refinement
  // around the pole at |omega_em|
  std::vector<double> brk;
  const double width = std::min(0.05, kPi / (8.0 * std::max(t_r, 1.0)));
  for (double w = 0.0; w < Om; w += width) brk.push_back(w);
  brk.push_back(Om);
  const double p = std::abs(omega_em);
  if (p > 0.0 && p < Om) {
    brk.push_back(p);
    for (double d = eps / 4.0; d < 0.2; d *= 2.0) {
      if (p - d > 0.0) brk.push_back(p - d);
      if (p + d < Om) brk.push_back(p + d);
    }
  }
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
  cd acc = 0.0;
  for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
    const double a = brk[i], b = brk[i + 1], h = (b - a) / 8.0;
    cd s = integrand(a) + integrand(b);
    for (int k = 1; k < 8; ++k) s += integrand(a + h * k) * ((k % 2) ? 4.0 : 2.0);
    acc += s * (h / 3.0);
  }
  return acc;
}

// assembles the brute P_virtual for one transition from the kernel oracle
double brute_virtual_flux(const DipoleSpectrum& s, double t_r, const SphericalGrid& grid,
                          const QuadratureSpec& spec) {
  cd sum = 0.0;
  for (const auto& t : s.transitions_from_excited()) {
    if (t.omega_em == 0.0) continue;
    const double A =
        integrate_sphere([&](const Vec3& n) { return polarization_sum(t.d_em, n); }, grid);
    const cd K = brute_virtual_kernel(t.omega_em, t_r, spec);
    sum += cd(0.0, -1.0) / (32.0 * kPi * kPi * kPi) * t.omega_em * t.omega_em * A * K;
  }
  return 2.0 * sum.real();
}

}  // namespace

TEST_CASE("first-order density: two-level values and directionality") {
  const auto s = two_level_unit();
  CHECK(first_order_density(s, {1.0, 0.0, 0.0}) ==
        doctest::Approx(1.0 / (16.0 * kPi * kPi)).epsilon(1e-14));
  CHECK(first_order_density(s, {0.0, 0.0, 1.0}) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("first-order density counts both upward and downward transitions") {
  const auto s = three_level_with_upward();
  const Vec3 n{0.0, 1.0, 0.0};
  // brute enumeration over the stored transitions
  double expect = 0.0;
  for (const auto& t : s.transitions_from_excited()) {
    const double w2 = t.omega_em * t.omega_em;
    expect += polarization_sum(t.d_em, n) * w2 * w2 / (16.0 * kPi * kPi);
  }
  CHECK(expect > 0.0);
  CHECK(first_order_density(s, n) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(first_order_terms(s, n).size() == 2);
}

TEST_CASE("second-order analytic density mirrors first order through sgn") {
  const auto s = three_level_with_upward();
  const Vec3 n{0.4, -0.3, 0.86};
  const auto first = first_order_terms(s, n);
  const auto second = real_second_order_terms_analytic(s, n);
  REQUIRE(first.size() == second.size());
  const auto u = *s.index_of("u");
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i].m == u) {
      CHECK(first[i].value + second[i].value == 0.0);  // exact cancellation
    } else {
      CHECK(second[i].value == first[i].value);  // downward doubles
    }
  }
}

TEST_CASE("second-order density: nascent-delta route agrees with the sgn form") {
  const auto s = three_level_with_upward();
  const auto spec = QuadratureSpec::defaults_for(s);
  const Vec3 n{0.0, 1.0, 0.0};
  const auto d = real_second_order_density(s, n, spec);
  double scale = 0.0;  // total magnitude of the per-transition terms
  for (const auto& term : first_order_terms(s, n)) scale += std::abs(term.value);
  CHECK(std::abs(d.pv_numeric - d.analytic) < 1e-3 * scale);
  CHECK(d.pv_error < 1e-3 * scale);
}

TEST_CASE("second-order integrand: value at t_r = 0 and zero at omega_em = 0") {
  const double w = 1.7;
  const cd at0 = second_order_integrand(w, 0.9, 0.0);
  CHECK(std::abs(at0 - cd(0.0, 2.0 * w * w * 0.9)) < 1e-14);
  CHECK(std::abs(second_order_integrand(w, 0.0, 3.0)) == 0.0);
}

TEST_CASE("second-order integrand equals its split into constant + oscillatory") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> uw(0.05, 4.0), up(-2.0, 2.0), ut(0.0, 20.0);
  for (int i = 0; i < 5000; ++i) {
    const double w = uw(rng);
    double p = up(rng);
    if (std::abs(std::abs(p) - w) < 1e-3) p += 0.02;
    const double t = ut(rng);
    const auto split = second_order_integrand_split(w, p, t);
    const cd whole = second_order_integrand(w, p, t);
    const double scale =
        std::max({1.0, std::abs(split.time_independent), std::abs(split.oscillatory)});
    CHECK(std::abs(split.time_independent + split.oscillatory - whole) <= 1e-10 * scale);
  }
}

TEST_CASE("second-order integrand: analytic bracket matches finite differences") {
  // oracle: raw bracket from the interaction kernel, differentiated centrally
  auto bracket = [](double w, double p, double t) {
    return std::conj(f_kernel(p - w, t)) * std::exp(cd(0.0, p * t)) -
           f_kernel(p + w, t) * std::exp(cd(0.0, -p * t));
  };
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> uw(0.1, 3.0), up(-1.5, 1.5), ut(0.5, 10.0);
  int ok_order = 0;
  const int trials = 100;
  for (int i = 0; i < trials; ++i) {
    const double w = uw(rng), p = up(rng), t = ut(rng);
    const cd analytic =
        second_order_integrand(w, p, t) * std::exp(cd(0.0, w * t)) / (w * w);
    double err[2];
    int idx = 0;
    for (const double h : {1e-2, 5e-3}) {
      const cd fd = (bracket(w, p, t + h) - 2.0 * bracket(w, p, t) + bracket(w, p, t - h)) /
                    (h * h);
      err[idx++] = std::abs(fd - analytic);
    }
    const double order = std::log2(err[0] / err[1]);
    if (order >= 1.9) ++ok_order;
    CHECK(err[1] < 1e-3 * std::max(1.0, std::abs(analytic)));
  }
  CHECK(ok_order >= trials * 9 / 10);  // quadratic convergence, noise-tolerant
}

TEST_CASE("total real flux: two-level unit case gives 1/(3 pi)") {
  const auto s = two_level_unit();
  const auto grid = SphericalGrid::product_gauss(32, 64);
  const auto spec = QuadratureSpec::defaults_for(s);
  CHECK(total_real_flux(s, grid, spec) ==
        doctest::Approx(1.0 / (3.0 * kPi)).epsilon(1e-8));
}

TEST_CASE("total real flux: upward transitions cancel out of the total") {
  const auto s = three_level_with_upward();
  const auto grid = SphericalGrid::product_gauss(32, 64);
  const auto spec = QuadratureSpec::defaults_for(s);
  const double quad = total_real_flux(s, grid, spec);
  const double direct = real_flux(s).total;  // m < e only by construction
  CHECK(quad == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("virtual flux: real result, sharp closed form matches brute quadrature") {
  const auto s = two_level_unit();
  const auto grid = SphericalGrid::product_gauss(32, 64);
  const auto spec = QuadratureSpec::defaults_for(s);
  for (const double t_r : {0.0, 0.7, 3.1, 12.0}) {
    const auto smp = virtual_flux(s, 1.0, 1.0 + t_r, grid, spec);
    CHECK(smp.imag_residual < 1e-12);
    const double brute = brute_virtual_flux(s, t_r, grid, spec);
    CHECK(smp.value == doctest::Approx(brute).epsilon(2e-6));
  }
  CHECK_THROWS_AS(virtual_flux(s, 1.0, 0.5, grid, spec), std::invalid_argument);
}

TEST_CASE("virtual flux: exponential regulator path matches brute quadrature") {
  const auto s = two_level_unit();
  const auto grid = SphericalGrid::product_gauss(16, 32);
  QuadratureSpec spec = QuadratureSpec::defaults_for(s);
  spec.cutoff = 40.0;
  spec.regulator = {RegulatorKind::exponential, 3.0};
  for (const double t_r : {0.4, 2.9}) {
    const auto smp = virtual_flux(s, 2.0, 2.0 + t_r, grid, spec);
    const double brute = brute_virtual_flux(s, t_r, grid, spec);
    CHECK(smp.value == doctest::Approx(brute).epsilon(5e-6));
  }
}

TEST_CASE("virtual flux: principal-value mode matches brute PV quadrature") {
  const auto s = two_level_unit();
  const auto grid = SphericalGrid::product_gauss(16, 32);
  QuadratureSpec spec = QuadratureSpec::defaults_for(s);
  spec.cutoff = 30.0;
  spec.prescription = PolePrescription::principal_value;
  // late-time limit of the PV kernel: Im K -> -pi p^2 r(p), so
  // P_v(infty) = (A p^2 / (2 (2pi)^3)) Im K(infty) = -1/(6 pi); this constant
  // offset is what distinguishes the PV mode from the retarded one
  const double pv_asymptote = (8.0 * kPi / 3.0) * (-kPi) / (2.0 * 8.0 * kPi * kPi * kPi);
  CHECK(pv_asymptote == doctest::Approx(-1.0 / (6.0 * kPi)).epsilon(1e-12));
  const auto late = virtual_flux(s, 1.0, 1.0 + 5000.0, grid, spec);
  CHECK(late.value == doctest::Approx(pv_asymptote).epsilon(2e-2));
}

TEST_CASE("virtual flux envelope decays: late-window max below early-window max") {
  const auto s = two_level_unit();
  const auto grid = SphericalGrid::product_gauss(16, 32);
  const auto spec = QuadratureSpec::defaults_for(s);  // omega_em = 1
  std::vector<double> early_t, late_t;
  for (double tr = 0.0; tr <= 10.0; tr += 0.25) early_t.push_back(1.0 + tr);
  for (double tr = 50.0; tr <= 100.0; tr += 0.5) late_t.push_back(1.0 + tr);
  auto max_abs = [&](const std::vector<double>& ts) {
    double m = 0.0;
    for (const auto& smp : virtual_flux_series(s, 1.0, ts, grid, spec).samples)
      m = std::max(m, std::abs(smp.value));
    return m;
  };
  const double early = max_abs(early_t);
  const double late = max_abs(late_t);
  CHECK(late < early);
  CHECK(early > 1.0);   // cutoff-scale transient right after switch-on
  CHECK(late < 0.5);
}

TEST_CASE("virtual flux antisymmetry: inverting the spectrum flips the sign") {
  const auto s = two_level_unit();
  RawSpectrum raw;
  raw.levels = {{"g", 0.0}, {"e", 1.0}};
  raw.dipoles = {{"e", "g", CVec3{cd(0), cd(0), cd(1)}}};
  raw.excited = "g";  // only an upward transition now
  const auto inv = DipoleSpectrum::validate(raw);
  const auto grid = SphericalGrid::product_gauss(16, 32);
  const auto spec = QuadratureSpec::defaults_for(s);
  for (const double t_r : {0.5, 4.2}) {
    const double a = virtual_flux(s, 1.0, 1.0 + t_r, grid, spec).value;
    const double b = virtual_flux(inv, 1.0, 1.0 + t_r, grid, spec).value;
    CHECK(b == doctest::Approx(-a).epsilon(1e-12));
  }
}

TEST_CASE("time average: constants, full periods, errors") {
  std::vector<double> ts, vs;
  for (int i = 0; i <= 100; ++i) {
    ts.push_back(0.1 * i);
    vs.push_back(2.5);
  }
  CHECK(time_average(ts, vs, 10.0) == doctest::Approx(2.5).epsilon(1e-15));

  const double w0 = 2.0 * kPi;  // period 1, average over 3 periods
  std::vector<double> tc, vc;
  const int n = 48 * 3;
  for (int i = 0; i <= n; ++i) {
    tc.push_back(3.0 * i / n);
    vc.push_back(std::cos(w0 * tc.back()));
  }
  CHECK(std::abs(time_average(tc, vc, 3.0)) < 1e-10);

  CHECK_THROWS(time_average({}, {}, 1.0));
  CHECK_THROWS(time_average(ts, vs, 200.0));
}

TEST_CASE("running average agrees with the explicit series average") {
  const auto s = two_level_unit();
  const auto grid = SphericalGrid::product_gauss(8, 16);
  const auto spec = QuadratureSpec::defaults_for(s);
  const double dt = 0.01;
  const auto points = virtual_flux_running_average(s, grid, spec, 400.0, dt);
  REQUIRE(!points.empty());
  const auto& pt = points.front();  // first block boundary
  std::vector<double> ts, vs;
  const std::size_t n = static_cast<std::size_t>(std::llround(pt.T / dt));
  const double radius = 1.0;
  for (std::size_t i = 0; i <= n; ++i) {
    ts.push_back(dt * i);
    vs.push_back(virtual_flux(s, radius, radius + dt * i, grid, spec).value);
  }
  CHECK(pt.average == doctest::Approx(time_average(ts, vs, pt.T)).epsilon(1e-10));
}

TEST_CASE("density breakdown carries the 1/x^2 prefactor") {
  const auto s = two_level_unit();
  const auto spec = QuadratureSpec::defaults_for(s);
  const Vec3 n{1.0, 0.0, 0.0};
  const std::vector<double> times{1.5, 2.5};
  const auto at1 = flux_density_breakdown(s, n, 1.0, times, spec);
  for (const double x : {10.0, 1000.0}) {
    std::vector<double> shifted{x + 0.5, x + 1.5};
    const auto at_x = flux_density_breakdown(s, n, x, shifted, spec);
    CHECK(x * x * at_x.first_order ==
          doctest::Approx(at1.first_order).epsilon(1e-12));
    CHECK(x * x * at_x.real_second_order ==
          doctest::Approx(at1.real_second_order).epsilon(1e-12));
    // virtual density at equal retarded times scales the same way
    CHECK(x * x * at_x.virtual_density[0] ==
          doctest::Approx(at1.virtual_density[0]).epsilon(1e-12));
  }
}

TEST_CASE("flux report: route agreement, averages and diagnostics") {
  const auto s = two_level_unit();
  const auto grid = SphericalGrid::product_gauss(16, 32);
  const auto spec = QuadratureSpec::defaults_for(s);
  std::vector<double> times;
  for (int i = 0; i <= 200; ++i) times.push_back(1.0 + 0.25 * i);
  const auto rep = make_flux_report(s, grid, spec, 1.0, times);
  CHECK(rep.real_spectrum_path.total ==
        doctest::Approx(1.0 / (3.0 * kPi)).epsilon(1e-12));
  CHECK(rep.real_quadrature_path ==
        doctest::Approx(rep.real_spectrum_path.total).epsilon(1e-10));
  CHECK(rep.virtual_series.samples.size() == times.size());
  CHECK(rep.cutoff_sensitivity > 0.0);  // virtual magnitudes are cutoff dependent
  CHECK(rep.average_window == doctest::Approx(50.0));
}
