#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "dipolerad/errors.hpp"
#include "dipolerad/numerics.hpp"
#include "dipolerad/quadrature.hpp"

using namespace dipolerad;
using cd = std::complex<double>;

namespace {

const double kPi = std::numbers::pi;

QuadratureSpec base_spec(double cutoff = 50.0, double eps = 1e-3) {
  QuadratureSpec s;
  s.cutoff = cutoff;
  s.epsilon = eps;
  return s;
}

// simple composite Simpson oracle, independent of the panel machinery
template <typename F>
cd simpson(F&& f, double a, double b, int n /*even*/) {
  const double h = (b - a) / n;
  cd acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + h * i) * ((i % 2) ? 4.0 : 2.0);
  return acc * (h / 3.0);
}

}  // namespace

TEST_CASE("f kernel: exact limits and special values") {
  CHECK(f_kernel(0.0, 3.0) == cd(3.0, 0.0));
  CHECK(f_kernel(2.7, 0.0) == cd(0.0, 0.0));
  const cd v = f_kernel(1.0, kPi);
  CHECK(std::abs(v - cd(0.0, 2.0)) < 1e-15);  // (e^{i pi}-1)/i = 2i
}

TEST_CASE("f kernel: series and direct branches agree at the switch point") {
  const double t = 2.0;
  const double w = 1.0000001e-4 / t;  // just over the switch: direct branch
  const cd direct = f_kernel(w, t);
  const double wt = w * t;
  const cd series{t * (1.0 - wt * wt / 6.0), t * wt * 0.5};
  CHECK(std::abs(direct - series) <= 1e-13 * std::abs(direct));
}

TEST_CASE("f kernel magnitude bound |f| <= min(|t|, 2/|w|)") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uw(-30.0, 30.0), ut(-20.0, 20.0);
  for (int i = 0; i < 5000; ++i) {
    const double w = uw(rng), t = ut(rng);
    const double bound =
        w == 0.0 ? std::abs(t) : std::min(std::abs(t), 2.0 / std::abs(w));
    CHECK(std::abs(f_kernel(w, t)) <= bound * (1.0 + 1e-13) + 1e-300);
  }
}

TEST_CASE("delta_tau: center value, first zero, evenness") {
  const double tau = 37.0;
  CHECK(delta_tau(0.0, tau) == doctest::Approx(tau / (2.0 * kPi)).epsilon(1e-15));
  CHECK(std::abs(delta_tau(2.0 * kPi / tau, tau)) < 1e-15);
  CHECK(delta_tau(0.3, tau) == delta_tau(-0.3, tau));
  CHECK_THROWS(delta_tau(1.0, 0.0));
}

TEST_CASE("delta_tau acts as a nascent delta on a Gaussian") {
  // oracle: Simpson on [0, 9] resolving the sin(w tau/2) oscillation
  const double tau = 200.0;
  const auto f = [&](double w) {
    return cd(delta_tau(w, tau) * std::exp(-w * w), 0.0);
  };
  const double integral = 2.0 * simpson(f, 0.0, 9.0, 200000).real();
  CHECK(integral == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("pv_delta_integral converges to 2 pi w(omega0) sgn(omega0)") {
  auto w4 = [](double w) { return w * w * w * w; };
  const auto spec = base_spec(50.0, 1e-3);
  const auto ext = pv_delta_extrapolated(1.0, w4, spec);
  CHECK(std::abs(ext.value - 2.0 * kPi) < 1e-4);
  CHECK(ext.error_estimate < 1e-4);
  // raw single-epsilon values are far off (the Omega-dependent linear term)
  CHECK(std::abs(ext.values[0] - 2.0 * kPi) > 1.0);

  // antisymmetry under omega0 -> -omega0
  const auto neg = pv_delta_extrapolated(-1.0, w4, spec);
  CHECK(neg.value == doctest::Approx(-ext.value).epsilon(1e-10));

  // zero weight integrates to zero
  const auto zero = pv_delta_integral(1.0, [](double) { return 0.0; }, spec);
  CHECK(zero.delta_part == 0.0);
  CHECK(zero.direct_pv == 0.0);
}

TEST_CASE("pv_delta extrapolated value is cutoff independent") {
  auto w4 = [](double w) { return w * w * w * w; };
  const double ref = pv_delta_extrapolated(1.0, w4, base_spec(100.0, 1e-3)).value;
  for (const double cutoff : {1.5, 2.0, 10.0, 50.0}) {
    const auto ext = pv_delta_extrapolated(1.0, w4, base_spec(cutoff, 1e-3));
    CHECK(ext.value == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("pv_delta: the discarded PV piece matches the standalone PV quadrature") {
  auto w4 = [](double w) { return w * w * w * w; };
  for (const double om0 : {1.0, -0.7, 3.3}) {
    const auto parts = pv_delta_integral_at(om0, w4, base_spec(50.0, 1e-4), 1e-4);
    // Re B -> PV as eps -> 0 with an O(eps |w'|) gap; both routes are
    // independent quadratures of the same limit
    const double scale = std::max(1.0, std::abs(parts.direct_pv));
    CHECK(std::abs(parts.bracket_pv - parts.direct_pv) < 1e-5 * scale + 0.05);
  }
}

TEST_CASE("pv_delta rejects out-of-range poles and bad widths") {
  auto w4 = [](double w) { return w * w * w * w; };
  const auto spec = base_spec(50.0, 1e-3);
  CHECK_THROWS_AS(pv_delta_integral(0.0, w4, spec), std::invalid_argument);
  CHECK_THROWS_AS(pv_delta_integral(60.0, w4, spec), std::invalid_argument);
  CHECK_THROWS_AS(pv_delta_integral_at(1.0, w4, spec, -1.0), std::invalid_argument);
  QuadratureSpec bad = spec;
  bad.n_nodes = 8;
  CHECK_THROWS_AS(pv_delta_integral(1.0, w4, bad), ConfigError);
}

TEST_CASE("oscillatory integral: sharp-cutoff phase has a closed form") {
  auto spec = base_spec(30.0, 1e-3);
  for (const double t : {0.3, 7.0, 41.0}) {
    const cd val =
        regulated_oscillatory_integral([&](double w) { return std::exp(cd(0.0, -w * t)); }, t,
                                       spec);
    const cd expected = (1.0 - std::exp(cd(0.0, -spec.cutoff * t))) / cd(0.0, t);
    CHECK(std::abs(val - expected) <= 1e-8 * std::abs(expected));
  }
  // t = 0 with unit integrand: the cutoff itself
  const cd flat = regulated_oscillatory_integral([](double) { return cd(1.0, 0.0); }, 0.0, spec);
  CHECK(flat.real() == doctest::Approx(spec.cutoff).epsilon(1e-13));
}

TEST_CASE("oscillatory integral: exponential regulator matches the Laplace form") {
  QuadratureSpec spec = base_spec(80.0, 1e-3);
  const double scale = 2.0;
  spec.regulator = {RegulatorKind::exponential, scale};
  for (const double t : {0.0, 1.3, 6.0}) {
    const cd val = regulated_oscillatory_integral(
        [&](double w) { return w * std::exp(cd(0.0, -w * t)); }, t, spec);
    const cd denom = 1.0 + cd(0.0, scale * t);
    const cd expected = scale * scale / (denom * denom);
    CHECK(std::abs(val - expected) <= 1e-8 * std::abs(expected));
  }
}

TEST_CASE("oscillatory integral: halving panel width moves the result by < 1e-9") {
  auto g = [](double w) { return std::exp(cd(0.0, -w * 7.0)) * (1.0 + 0.1 * w); };
  const double t = 7.0;
  const cd coarse = oscillatory_panel_integral(g, t, 30.0, 64, 16, 0.0, {}, 0.0);
  const cd fine = oscillatory_panel_integral(g, t, 30.0, 64 * 32, 16, 0.0, {}, 0.0);
  CHECK(std::abs(coarse - fine) <= 1e-9 * std::abs(fine));
}

TEST_CASE("oscillatory integral rejects non-finite samples") {
  const auto spec = base_spec(10.0, 1e-3);
  CHECK_THROWS_AS(regulated_oscillatory_integral(
                      [](double w) { return cd(w > 5.0 ? std::nan("") : 1.0, 0.0); }, 1.0, spec),
                  NumericalError);
}

TEST_CASE("linear phase integral closed form vs Simpson") {
  const double a = -1.3, b = 7.9, t = 2.7;
  const cd c{0.4, -0.2};
  const cd val = linear_phase_integral(a, b, c, t);
  const cd ref =
      simpson([&](double u) { return (u + c) * std::exp(cd(0.0, -u * t)); }, a, b, 200000);
  CHECK(std::abs(val - ref) < 1e-10 * std::max(1.0, std::abs(ref)));
  // t = 0 degenerates to the plain moment
  CHECK(std::abs(linear_phase_integral(a, b, c, 0.0) -
                 (cd(0.5 * (b * b - a * a)) + c * (b - a))) < 1e-14);
}

TEST_CASE("pole phase integral (retarded) vs brute Lorentzian quadrature") {
  const double eps = 1e-2;
  for (const double t : {0.0, 0.8, 4.0}) {
    const double a = -1.0, b = 9.0;
    const cd val = pole_phase_integral(a, b, eps, t);
    const cd ref = simpson(
        [&](double u) { return std::exp(cd(0.0, -u * t)) / cd(u, eps); }, a, b, 400000);
    CHECK(std::abs(val - ref) < 2e-7 * std::max(1.0, std::abs(ref)));
  }
  // interval not straddling the pole
  const cd off = pole_phase_integral(2.0, 5.0, eps, 1.1);
  const cd off_ref = simpson(
      [&](double u) { return std::exp(cd(0.0, -u * 1.1)) / cd(u, eps); }, 2.0, 5.0, 100000);
  CHECK(std::abs(off - off_ref) < 1e-10);
  CHECK_THROWS(pole_phase_integral(-1.0, 1.0, 0.0, 1.0));
  CHECK_THROWS(pole_phase_integral(-1.0, 1.0, 1e-3, -1.0));
}

TEST_CASE("pole phase integral (PV) vs symmetric-fold oracle") {
  const double a = -1.0, b = 9.0;
  for (const double t : {0.5, 2.0, 11.0}) {
    const cd val = pole_phase_integral_pv(a, b, t);
    // fold (-1,1) symmetrically: PV int = int_0^1 -2i sin(ut)/u du + int_1^9
    const cd folded = simpson(
        [&](double u) { return cd(0.0, -2.0 * std::sin(u * t) / u); }, 1e-12, 1.0, 100000);
    const cd outer =
        simpson([&](double u) { return std::exp(cd(0.0, -u * t)) / cd(u, 0.0); }, 1.0, 9.0,
                400000);
    CHECK(std::abs(val - (folded + outer)) < 1e-8);
  }
  CHECK(std::abs(pole_phase_integral_pv(a, b, 0.0) - cd(std::log(9.0), 0.0)) < 1e-14);
  // long-time limit of the straddling PV integral is -i pi
  const cd late = pole_phase_integral_pv(a, b, 4000.0);
  CHECK(late.imag() == doctest::Approx(-kPi).epsilon(1e-3));
}

TEST_CASE("quadrature spec: defaults and validation against a spectrum") {
  RawSpectrum raw;
  raw.levels = {{"g", 0.0}, {"m", 0.75}, {"e", 2.0}};
  raw.dipoles = {{"e", "g", CVec3{cd(0), cd(0), cd(1)}},
                 {"e", "m", CVec3{cd(1), cd(0), cd(0)}}};
  raw.excited = "e";
  const auto s = DipoleSpectrum::validate(raw);
  const auto spec = QuadratureSpec::defaults_for(s);
  CHECK(spec.cutoff == doctest::Approx(200.0));        // 100 max|omega_em|
  CHECK(spec.epsilon == doctest::Approx(1.25e-3));     // 1e-3 min nonzero
  CHECK_NOTHROW(spec.validate_for(s));
  QuadratureSpec bad = spec;
  bad.cutoff = 1.0;
  CHECK_THROWS_AS(bad.validate_for(s), ConfigError);
  bad = spec;
  bad.epsilon = 3.0;
  CHECK_THROWS_AS(bad.validate_for(s), ConfigError);
}
