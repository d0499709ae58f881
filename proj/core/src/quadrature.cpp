#include "dipolerad/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dipolerad/errors.hpp"
#include "dipolerad/numerics.hpp"
#include "dipolerad/special_functions.hpp"

namespace dipolerad {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

/// Integrates a complex integrand over consecutive panels with a shared
/// Gauss-Legendre rule; panel results combined by pairwise summation.
template <typename F>
cd panel_integrate(F&& f, const std::vector<double>& breaks, int nodes_per_panel) {
  const GaussRule& rule = cached_gauss_legendre(nodes_per_panel);
  std::vector<cd> parts;
  parts.reserve(breaks.size());
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    cd acc = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const cd v = f(mid + half * rule.x[i]);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw NumericalError("quadrature: non-finite integrand sample");
      acc += rule.w[i] * v;
    }
    parts.push_back(half * acc);
  }
  return pairwise_sum(std::span<const cd>(parts));
}

/// Panel edges over [0, hi] graded toward the poles at +-pole_abs: the local
/// step is half the distance to the nearest pole, floored at eps_floor/2 and
/// capped at hi/16. Lands exactly on the pole when it lies inside.
std::vector<double> graded_breakpoints(double hi, double pole_abs, double eps_floor) {
  std::vector<double> breaks{0.0};
  double om = 0.0;
  const double cap = hi / 16.0;
  const double floor_step = std::max(eps_floor * 0.5, hi * 1e-12);
  while (om < hi) {
    const double d = std::min(std::abs(om - pole_abs), om + pole_abs);
    double step = std::clamp(0.5 * std::max(d, eps_floor * 0.5), floor_step, cap);
    if (om < pole_abs && om + 1.25 * step > pole_abs) step = pole_abs - om;
    om = std::min(hi, om + std::max(step, floor_step));
    breaks.push_back(om);
  }
  return breaks;
}

int effective_nodes_per_panel(const QuadratureSpec& spec, std::size_t n_panels) {
  int npp = spec.nodes_per_panel;
  if (static_cast<long>(n_panels) * npp < spec.n_nodes)
    npp = static_cast<int>((spec.n_nodes + n_panels - 1) / n_panels);
  return std::min(npp, 64);
}

}  // namespace

double Regulator::operator()(double omega) const {
  return kind == RegulatorKind::sharp ? 1.0 : std::exp(-omega / scale);
}

std::string Regulator::name() const {
  if (kind == RegulatorKind::sharp) return "sharp";
  return "exponential(scale=" + std::to_string(scale) + ")";
}

QuadratureSpec QuadratureSpec::defaults_for(const DipoleSpectrum& s) {
  QuadratureSpec spec;
  double wmax = 0.0, wmin = 0.0;
  for (const auto& t : s.transitions_from_excited()) {
    const double aw = std::abs(t.omega_em);
    if (aw == 0.0) continue;
    wmax = std::max(wmax, aw);
    wmin = (wmin == 0.0) ? aw : std::min(wmin, aw);
  }
  if (wmax > 0.0) {
    spec.cutoff = 100.0 * wmax;
    spec.epsilon = 1e-3 * wmin;
  }
  return spec;
}

void QuadratureSpec::validate() const {
  if (!(cutoff > 0.0)) throw ConfigError("quadrature: cutoff must be > 0");
  if (!(epsilon > 0.0)) throw ConfigError("quadrature: epsilon must be > 0");
  if (n_nodes < 64) throw ConfigError("quadrature: n_nodes must be >= 64");
  if (nodes_per_panel < 4 || nodes_per_panel > 64)
    throw ConfigError("quadrature: nodes_per_panel must be in [4, 64]");
  if (regulator.kind == RegulatorKind::exponential && !(regulator.scale > 0.0))
    throw ConfigError("quadrature: exponential regulator scale must be > 0");
}

void QuadratureSpec::validate_for(const DipoleSpectrum& s) const {
  validate();
  for (const auto& t : s.transitions_from_excited()) {
    const double aw = std::abs(t.omega_em);
    if (aw == 0.0) continue;
    if (cutoff <= aw)
      throw ConfigError("quadrature: cutoff must exceed every |omega_em|");
    if (epsilon >= aw)
      throw ConfigError("quadrature: epsilon must be well below min nonzero |omega_em|");
  }
}

std::complex<double> f_kernel(double omega, double t) {
  if (omega == 0.0) return {t, 0.0};
  const double wt = omega * t;
  if (std::abs(wt) < 1e-4) {
    // f = t (1 + i wt/2 - (wt)^2/6 + ...)
    return {t * (1.0 - wt * wt / 6.0), t * wt * 0.5};
  }
  // (e^{iwt}-1)/(iw) = sin(wt)/w + i * 2 sin^2(wt/2)/w, cancellation-free
  const double s = std::sin(0.5 * wt);
  return {std::sin(wt) / omega, 2.0 * s * s / omega};
}

double delta_tau(double omega, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("delta_tau: tau must be > 0");
  const double x = 0.5 * omega * tau;
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return tau / (2.0 * std::numbers::pi) * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
  }
  return std::sin(x) / (std::numbers::pi * omega);
}

PvDeltaParts pv_delta_integral_at(double omega0, const std::function<double(double)>& w,
                                  const QuadratureSpec& spec, double epsilon) {
  spec.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("pv_delta_integral: epsilon must be > 0");
  const double p = std::abs(omega0);
  if (!(p > 0.0) || !(p < spec.cutoff))
    throw std::invalid_argument("pv_delta_integral: requires 0 < |omega0| < cutoff");

  const auto breaks = graded_breakpoints(spec.cutoff, p, epsilon);
  const int npp = effective_nodes_per_panel(spec, breaks.size() - 1);

  const cd B = panel_integrate(
      [&](double om) {
        return w(om) * (1.0 / (om - omega0 + kI * epsilon) - 1.0 / (om + omega0 + kI * epsilon));
      },
      breaks, npp);

  PvDeltaParts out;
  out.delta_part = -2.0 * B.imag();
  out.bracket_pv = B.real();

  // Independent symmetric-limit PV of each bracket term.
  auto pv_one = [&](double q) -> double {
    if (q > 0.0 && q < spec.cutoff) {
      const double rho = std::min(q, spec.cutoff - q);
      // folded core: int_0^rho [w(q+u) - w(q-u)]/u du on geometric panels
      std::vector<double> core{rho};
      for (double u = 0.5 * rho; u > rho * 1e-13; u *= 0.5) core.push_back(u);
      core.push_back(0.0);
      std::sort(core.begin(), core.end());
      const cd folded = panel_integrate(
          [&](double u) { return cd((w(q + u) - w(q - u)) / u, 0.0); }, core, npp);
      // regular remainder outside the fold
      cd rest = 0.0;
      if (q - rho > 0.0) {
        auto br = graded_breakpoints(q - rho, q, epsilon);
        rest += panel_integrate([&](double om) { return cd(w(om) / (om - q), 0.0); }, br, npp);
      }
      if (q + rho < spec.cutoff) {
        std::vector<double> br;
        for (double v : graded_breakpoints(spec.cutoff - q - rho, 0.0, rho))
          br.push_back(q + rho + v);
        rest += panel_integrate([&](double om) { return cd(w(om) / (om - q), 0.0); }, br, npp);
      }
      return folded.real() + rest.real();
    }
    // pole outside the domain: plain graded panels toward omega = 0
    const auto br = graded_breakpoints(spec.cutoff, std::abs(q), epsilon);
    return panel_integrate([&](double om) { return cd(w(om) / (om - q), 0.0); }, br, npp).real();
  };
  out.direct_pv = pv_one(omega0) - pv_one(-omega0);
  return out;
}

PvDeltaParts pv_delta_integral(double omega0, const std::function<double(double)>& w,
                               const QuadratureSpec& spec) {
  return pv_delta_integral_at(omega0, w, spec, spec.epsilon);
}

PvDeltaExtrapolated pv_delta_extrapolated(double omega0, const std::function<double(double)>& w,
                                          const QuadratureSpec& spec) {
  PvDeltaExtrapolated out;
  out.epsilons = {10.0 * spec.epsilon, spec.epsilon, 0.1 * spec.epsilon};
  for (int i = 0; i < 3; ++i)
    out.values[i] = pv_delta_integral_at(omega0, w, spec, out.epsilons[i]).delta_part;
  // I(eps) = I0 + c1 eps + c3 eps^3 + ...; remove eps, then eps^3.
  const double r1 = (10.0 * out.values[1] - out.values[0]) / 9.0;
  const double r2 = (10.0 * out.values[2] - out.values[1]) / 9.0;
  out.value = (1000.0 * r2 - r1) / 999.0;
  out.error_estimate = std::abs(out.value - r2);
  return out;
}

std::complex<double> oscillatory_panel_integral(
    const std::function<std::complex<double>(double)>& f, double t_r, double cutoff,
    int n_nodes, int nodes_per_panel, double smooth_scale,
    std::span<const double> refine_points, double fine_scale) {
  double width = std::numbers::pi / (4.0 * std::max(std::abs(t_r), 1.0));
  width = std::min(width, cutoff / 4.0);
  if (smooth_scale > 0.0) width = std::min(width, 0.5 * smooth_scale);
  std::size_t n_panels = static_cast<std::size_t>(std::ceil(cutoff / width));
  n_panels = std::max<std::size_t>(n_panels,
                                   (static_cast<std::size_t>(n_nodes) + nodes_per_panel - 1) /
                                       nodes_per_panel);
  std::vector<double> breaks;
  breaks.reserve(n_panels + 1 + 64 * refine_points.size());
  for (std::size_t k = 0; k <= n_panels; ++k)
    breaks.push_back(cutoff * static_cast<double>(k) / static_cast<double>(n_panels));
  const double base_width = cutoff / static_cast<double>(n_panels);
  for (const double q : refine_points) {
    if (!(q > 0.0) || !(q < cutoff) || !(fine_scale > 0.0)) continue;
    breaks.push_back(q);
    for (double d = fine_scale; d < base_width; d *= 2.0) {
      if (q - d > 0.0) breaks.push_back(q - d);
      if (q + d < cutoff) breaks.push_back(q + d);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return panel_integrate(f, breaks, nodes_per_panel);
}

std::complex<double> regulated_oscillatory_integral(
    const std::function<std::complex<double>(double)>& g, double t_r,
    const QuadratureSpec& spec) {
  spec.validate();
  const double smooth =
      spec.regulator.kind == RegulatorKind::exponential ? spec.regulator.scale : 0.0;
  return oscillatory_panel_integral(
      [&](double om) { return g(om) * spec.regulator(om); }, t_r, spec.cutoff, spec.n_nodes,
      spec.nodes_per_panel, smooth, {}, 0.0);
}

std::complex<double> linear_phase_integral(double a, double b, std::complex<double> c, double t) {
  if (t == 0.0) return 0.5 * (b * b - a * a) + c * (b - a);
  auto F = [&](double u) {
    return std::exp(cd(0.0, -u * t)) * (kI * u / t + 1.0 / (t * t) + kI * c / t);
  };
  return F(b) - F(a);
}

std::complex<double> pole_phase_integral(double a, double b, double eps, double t) {
  if (!(eps > 0.0)) throw std::invalid_argument("pole_phase_integral: eps must be > 0");
  if (t < 0.0) throw std::invalid_argument("pole_phase_integral: t must be >= 0");
  if (t == 0.0) return std::log((cd(b, eps)) / (cd(a, eps)));
  // antiderivative -e^{-eps t} E1(i (u + i eps) t); written with the scaled
  // E1 so only unit-modulus phases appear at large eps*t
  const cd za = cd(-eps * t, a * t);
  const cd zb = cd(-eps * t, b * t);
  cd v = std::exp(cd(0.0, -a * t)) * exp_e1_scaled(za) -
         std::exp(cd(0.0, -b * t)) * exp_e1_scaled(zb);
  // the z(u) path crosses the E1 branch cut when the interval straddles u=0
  if (a < 0.0 && b > 0.0) v -= 2.0 * std::numbers::pi * kI * std::exp(-eps * t);
  return v;
}

std::complex<double> pole_phase_integral_pv(double a, double b, double t) {
  if (t < 0.0) throw std::invalid_argument("pole_phase_integral_pv: t must be >= 0");
  if (a < 0.0 && b > 0.0) {
    if (t == 0.0) return std::log(b / -a);
    const SiCi fb = sine_cosine_integral(b * t);
    const SiCi fa = sine_cosine_integral(-a * t);
    return cd(fb.ci - fa.ci, -(fb.si + fa.si));
  }
  if (a > 0.0 && b > a) {
    if (t == 0.0) return std::log(b / a);
    const SiCi fb = sine_cosine_integral(b * t);
    const SiCi fa = sine_cosine_integral(a * t);
    return cd(fb.ci - fa.ci, -(fb.si - fa.si));
  }
  throw std::invalid_argument("pole_phase_integral_pv: unsupported interval");
}

}  // namespace dipolerad
