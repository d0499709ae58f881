#include "dipolerad/flux_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dipolerad/errors.hpp"
#include "dipolerad/numerics.hpp"
#include "dipolerad/parallel.hpp"

namespace dipolerad {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

const double kPi = std::numbers::pi;
const double kFirstOrderPrefactor = 1.0 / (16.0 * kPi * kPi);
// second-order frequency-integral prefactor 1/(4 (2 pi)^3)
const double kSecondOrderPrefactor = 1.0 / (32.0 * kPi * kPi * kPi);

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// One frequency integral of the oscillatory pipeline,
///   term(q) = int_0^Omega omega^2 r(omega) e^{-i(omega-q)t} / (omega - q + i eps) d omega,
/// with the retarded pole shift (or its PV limit). The full kernel is
/// K = term(+omega_em) - term(-omega_em).
cd oscillatory_pole_term(double q, double t_r, const QuadratureSpec& spec) {
  const double Om = spec.cutoff;
  const double eps = spec.epsilon;
  const bool pv = spec.prescription == PolePrescription::principal_value;

  if (spec.regulator.kind == RegulatorKind::sharp) {
    // substitute u = omega - q:
    //   (u+q)^2/(u+i eps) = (u + 2q - i eps) + (q - i eps)^2/(u + i eps)
    const double a = -q, b = Om - q;
    if (!pv) {
      return linear_phase_integral(a, b, cd(2.0 * q, -eps), t_r) +
             (cd(q, -eps) * cd(q, -eps)) * pole_phase_integral(a, b, eps, t_r);
    }
    return linear_phase_integral(a, b, cd(2.0 * q, 0.0), t_r) +
           (q * q) * pole_phase_integral_pv(a, b, t_r);
  }

  // exponential regulator: subtract the numerator frozen at the pole,
  // integrate the remainder by pole-refined oscillation panels, and add the
  // subtracted singular piece back in closed form.
  const double Nq = (q > 0.0 && q < Om) ? q * q * spec.regulator(q) : 0.0;
  const cd phase_q = std::exp(cd(0.0, q * t_r));
  auto remainder = [&](double om) -> cd {
    const cd den = pv ? cd(om - q, 0.0) : cd(om - q, eps);
    const double N = om * om * spec.regulator(om);
    return std::exp(cd(0.0, -om * t_r)) * phase_q * (N - Nq) / den;
  };
  const double refine[1] = {q};
  cd val = oscillatory_panel_integral(remainder, t_r, Om, spec.n_nodes, spec.nodes_per_panel,
                                      spec.regulator.scale, refine,
                                      std::max(eps * 0.5, Om * 1e-12));
  if (Nq != 0.0) {
    val += Nq * (pv ? pole_phase_integral_pv(-q, Om - q, t_r)
                    : pole_phase_integral(-q, Om - q, eps, t_r));
  }
  return val;
}

}  // namespace

std::vector<DensityTerm> first_order_terms(const DipoleSpectrum& s, const Vec3& xhat) {
  std::vector<DensityTerm> out;
  for (const auto& t : s.transitions_from_excited()) {
    const double w2 = t.omega_em * t.omega_em;
    out.push_back({t.to, kFirstOrderPrefactor * polarization_sum(t.d_em, xhat) * w2 * w2});
  }
  return out;
}

double first_order_density(const DipoleSpectrum& s, const Vec3& xhat) {
  std::vector<double> vals;
  for (const auto& term : first_order_terms(s, xhat)) vals.push_back(term.value);
  return pairwise_sum(vals);
}

std::vector<DensityTerm> real_second_order_terms_analytic(const DipoleSpectrum& s,
                                                          const Vec3& xhat) {
  std::vector<DensityTerm> out;
  for (const auto& t : s.transitions_from_excited()) {
    const double w2 = t.omega_em * t.omega_em;
    const double first = kFirstOrderPrefactor * polarization_sum(t.d_em, xhat) * w2 * w2;
    out.push_back({t.to, first * sgn(t.omega_em)});
  }
  return out;
}

double real_second_order_density_analytic(const DipoleSpectrum& s, const Vec3& xhat) {
  std::vector<double> vals;
  for (const auto& term : real_second_order_terms_analytic(s, xhat)) vals.push_back(term.value);
  return pairwise_sum(vals);
}

RealSecondOrderDensity real_second_order_density(const DipoleSpectrum& s, const Vec3& xhat,
                                                 const QuadratureSpec& spec) {
  spec.validate();
  RealSecondOrderDensity out;
  out.analytic = real_second_order_density_analytic(s, xhat);
  std::vector<double> vals, errs;
  for (const auto& t : s.transitions_from_excited()) {
    if (t.omega_em == 0.0) continue;  // sgn(0) = 0 convention
    const double pol = polarization_sum(t.d_em, xhat);
    if (pol == 0.0) continue;
    const auto pvx = pv_delta_extrapolated(
        t.omega_em, [](double w) { return w * w * w * w; }, spec);
    vals.push_back(kSecondOrderPrefactor * pol * pvx.value);
    errs.push_back(kSecondOrderPrefactor * pol * pvx.error_estimate);
  }
  out.pv_numeric = pairwise_sum(vals);
  out.pv_error = pairwise_sum(errs);
  return out;
}

std::complex<double> second_order_integrand(double omega, double omega_em, double t_r) {
  const double w2 = omega * omega;
  const double p = omega_em;
  return 2.0 * kI * w2 * p -
         w2 * p * p * (f_kernel(p - omega, t_r) - f_kernel(-(omega + p), t_r));
}

IntegrandSplit second_order_integrand_split(double omega, double omega_em, double t_r) {
  const double p = omega_em;
  const double w2 = omega * omega;
  const double w4 = w2 * w2;
  IntegrandSplit out;
  out.time_independent = kI * w4 * (1.0 / (omega - p) - 1.0 / (omega + p));
  out.oscillatory = -kI * w2 * p * p *
                    (std::exp(cd(0.0, -(omega - p) * t_r)) / (omega - p) -
                     std::exp(cd(0.0, -(omega + p) * t_r)) / (omega + p));
  return out;
}

double total_real_flux(const DipoleSpectrum& s, const SphericalGrid& grid,
                       const QuadratureSpec& spec) {
  spec.validate_for(s);
  return integrate_sphere(
      [&](const Vec3& xhat) {
        return first_order_density(s, xhat) + real_second_order_density_analytic(s, xhat);
      },
      grid);
}

namespace {

/// Precomputed per-transition data for the oscillatory flux: the angular
/// factor A_m = int dOmega sum_lambda |e_lambda . d_em|^2 (or the
/// per-direction polarization sum) and omega_em.
struct VirtualContext {
  struct Term {
    double omega_em;
    double angular;
  };
  std::vector<Term> terms;
  QuadratureSpec spec;

  static VirtualContext over_sphere(const DipoleSpectrum& s, const SphericalGrid& grid,
                                    const QuadratureSpec& spec) {
    spec.validate_for(s);
    VirtualContext ctx{{}, spec};
    for (const auto& t : s.transitions_from_excited()) {
      if (t.omega_em == 0.0 || norm2(t.d_em) == 0.0) continue;
      const double A =
          integrate_sphere([&](const Vec3& n) { return polarization_sum(t.d_em, n); }, grid);
      ctx.terms.push_back({t.omega_em, A});
    }
    return ctx;
  }

  static VirtualContext at_direction(const DipoleSpectrum& s, const Vec3& xhat,
                                     const QuadratureSpec& spec) {
    spec.validate_for(s);
    VirtualContext ctx{{}, spec};
    for (const auto& t : s.transitions_from_excited()) {
      if (t.omega_em == 0.0 || norm2(t.d_em) == 0.0) continue;
      ctx.terms.push_back({t.omega_em, polarization_sum(t.d_em, xhat)});
    }
    return ctx;
  }

  /// S(t_r) = sum_m (-i/(4 (2pi)^3)) omega_em^2 A_m K_m(t_r); result = S + c.c.
  cd half_sum(double t_r) const {
    cd buf[32];
    std::vector<cd> overflow;
    const bool small = terms.size() <= 32;
    if (!small) overflow.resize(terms.size());
    cd* parts = small ? buf : overflow.data();
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const auto& term = terms[i];
      const cd K = oscillatory_pole_term(term.omega_em, t_r, spec) -
                   oscillatory_pole_term(-term.omega_em, t_r, spec);
      parts[i] = -kI * kSecondOrderPrefactor * term.omega_em * term.omega_em * term.angular * K;
    }
    return pairwise_sum(std::span<const cd>(parts, terms.size()));
  }

  VirtualFluxSample sample(double radius, double t) const {
    const double t_r = t - radius;
    if (t_r < 0.0)
      throw std::invalid_argument("virtual_flux: t must be >= radius (retarded time >= 0)");
    const cd S = half_sum(t_r);
    const cd total = S + std::conj(S);
    VirtualFluxSample out;
    out.t = t;
    out.t_r = t_r;
    out.value = total.real();
    out.imag_residual = std::abs(total.imag());
    return out;
  }
};

}  // namespace

VirtualFluxSample virtual_flux(const DipoleSpectrum& s, double radius, double t,
                               const SphericalGrid& grid, const QuadratureSpec& spec) {
  if (!(radius > 0.0)) throw std::invalid_argument("virtual_flux: radius must be > 0");
  return VirtualContext::over_sphere(s, grid, spec).sample(radius, t);
}

VirtualFluxSeries virtual_flux_series(const DipoleSpectrum& s, double radius,
                                      std::span<const double> times, const SphericalGrid& grid,
                                      const QuadratureSpec& spec) {
  if (!(radius > 0.0)) throw std::invalid_argument("virtual_flux: radius must be > 0");
  const auto ctx = VirtualContext::over_sphere(s, grid, spec);
  VirtualFluxSeries out;
  out.samples.resize(times.size());
  parallel_chunks(times.size(), 64, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out.samples[i] = ctx.sample(radius, times[i]);
  });
  return out;
}

double time_average(std::span<const double> times, std::span<const double> values, double T) {
  if (times.empty() || times.size() != values.size())
    throw std::invalid_argument("time_average: empty or mismatched series");
  if (!(T > 0.0)) throw std::invalid_argument("time_average: window must be > 0");
  const double t0 = times.front();
  const double t_end = t0 + T;
  if (t_end > times.back() + 1e-12 * std::max(1.0, std::abs(times.back())))
    throw std::invalid_argument("time_average: window exceeds sampled range");
  std::vector<double> segs;
  segs.reserve(times.size());
  for (std::size_t i = 0; i + 1 < times.size() && times[i] < t_end; ++i) {
    const double a = times[i];
    const double b = std::min(times[i + 1], t_end);
    double vb = values[i + 1];
    if (b < times[i + 1]) {  // linear interpolation on the partial segment
      const double f = (b - a) / (times[i + 1] - a);
      vb = values[i] + f * (values[i + 1] - values[i]);
    }
    segs.push_back(0.5 * (values[i] + vb) * (b - a));
  }
  return pairwise_sum(segs) / T;
}

std::vector<RunningAveragePoint> virtual_flux_running_average(
    const DipoleSpectrum& s, const SphericalGrid& grid, const QuadratureSpec& spec,
    double t_max, double dt) {
  if (!(dt > 0.0) || !(t_max > dt))
    throw std::invalid_argument("virtual_flux_running_average: need t_max > dt > 0");
  const auto ctx = VirtualContext::over_sphere(s, grid, spec);
  const std::size_t n = static_cast<std::size_t>(std::floor(t_max / dt)) + 1;  // samples 0..n-1
  constexpr std::size_t kBlock = 32768;
  const std::size_t n_blocks = (n - 1 + kBlock - 1) / kBlock;  // trapezoid segments
  std::vector<double> block_int(n_blocks, 0.0);
  parallel_chunks(n_blocks, 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t blk = b; blk < e; ++blk) {
      const std::size_t i0 = blk * kBlock;
      const std::size_t i1 = std::min(n - 1, (blk + 1) * kBlock);
      // trapezoid over samples [i0, i1]; edge samples recomputed per block,
      // bitwise identical across blocks
      double prev = ctx.half_sum(static_cast<double>(i0) * dt).real() * 2.0;
      std::vector<double> segs;
      segs.reserve(i1 - i0);
      for (std::size_t i = i0 + 1; i <= i1; ++i) {
        const double cur = ctx.half_sum(static_cast<double>(i) * dt).real() * 2.0;
        segs.push_back(0.5 * (prev + cur) * dt);
        prev = cur;
      }
      block_int[blk] = pairwise_sum(segs);
    }
  });
  std::vector<RunningAveragePoint> out;
  out.reserve(n_blocks);
  double acc = 0.0;
  for (std::size_t blk = 0; blk < n_blocks; ++blk) {
    acc += block_int[blk];
    const std::size_t edge = std::min(n - 1, (blk + 1) * kBlock);
    const double T = static_cast<double>(edge) * dt;
    out.push_back({T, acc / T});
  }
  return out;
}

FluxDensityBreakdown flux_density_breakdown(const DipoleSpectrum& s, const Vec3& xhat,
                                            double radius, std::span<const double> times,
                                            const QuadratureSpec& spec) {
  if (!(radius > 0.0)) throw std::invalid_argument("flux_density_breakdown: radius must be > 0");
  const double inv_x2 = 1.0 / (radius * radius);
  FluxDensityBreakdown out;
  out.direction = triad_for(xhat).xhat;
  out.radius = radius;
  out.first_order = first_order_density(s, xhat) * inv_x2;
  out.real_second_order = real_second_order_density_analytic(s, xhat) * inv_x2;
  const auto ctx = VirtualContext::at_direction(s, xhat, spec);
  for (const double t : times) {
    const auto smp = ctx.sample(radius, t);
    out.times.push_back(t);
    out.virtual_density.push_back(smp.value * inv_x2);
  }
  return out;
}

FluxReport make_flux_report(const DipoleSpectrum& s, const SphericalGrid& grid,
                            const QuadratureSpec& spec, double radius,
                            std::span<const double> times) {
  FluxReport rep;
  rep.spec = spec;
  rep.radius = radius;
  rep.real_spectrum_path = real_flux(s);
  rep.real_quadrature_path = total_real_flux(s, grid, spec);
  const double scale =
      std::max({std::abs(rep.real_spectrum_path.total), std::abs(rep.real_quadrature_path), 1e-300});
  if (std::abs(rep.real_spectrum_path.total - rep.real_quadrature_path) > 1e-10 * scale)
    throw NumericalError("flux report: real-flux routes disagree beyond 1e-10 relative");
  rep.virtual_series = virtual_flux_series(s, radius, times, grid, spec);

  if (times.size() >= 2) {
    std::vector<double> ts, vs;
    for (const auto& smp : rep.virtual_series.samples) {
      ts.push_back(smp.t_r);
      vs.push_back(smp.value);
    }
    rep.average_window = ts.back() - ts.front();
    if (rep.average_window > 0.0) rep.virtual_time_average = time_average(ts, vs, rep.average_window);
  }

  // regulator robustness diagnostic: rerun the series at half the cutoff
  QuadratureSpec half = spec;
  half.cutoff *= 0.5;
  bool half_ok = true;
  try {
    half.validate_for(s);
  } catch (const ConfigError&) {
    half_ok = false;  // halved cutoff would fall below a transition frequency
  }
  if (half_ok && !times.empty()) {
    const auto alt = virtual_flux_series(s, radius, times, grid, half);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      num = std::max(num, std::abs(rep.virtual_series.samples[i].value - alt.samples[i].value));
      den = std::max(den, std::abs(rep.virtual_series.samples[i].value));
    }
    rep.cutoff_sensitivity = den > 0.0 ? num / den : 0.0;
  }
  return rep;
}

}  // namespace dipolerad
