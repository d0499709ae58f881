#pragma once
#include <array>
#include <complex>
#include <functional>
#include <span>
#include <string>

#include "dipolerad/spectrum.hpp"

namespace dipolerad {

enum class RegulatorKind { sharp, exponential };

/// Frequency regulator r(omega): sharp = indicator of [0, cutoff];
/// exponential = e^{-omega/scale} (still truncated at the cutoff).
struct Regulator {
  RegulatorKind kind = RegulatorKind::sharp;
  double scale = 1.0;

  double operator()(double omega) const;
  std::string name() const;
};

/// Pole handling for the frequency integrals with simple poles at the
/// transition frequencies. `retarded` shifts poles by -i*epsilon (the
/// denominators gain +i*epsilon), `principal_value` takes the symmetric
/// limit. The retarded form at finite epsilon is what makes the oscillatory
/// flux decay; the PV form retains a constant long-time offset.
enum class PolePrescription { retarded, principal_value };

struct QuadratureSpec {
  double cutoff = 100.0;  // max frequency Omega
  Regulator regulator{};
  double epsilon = 1e-3;  // nascent-delta width
  int n_nodes = 256;      // minimum total nodes per 1-d integral
  int nodes_per_panel = 16;
  PolePrescription prescription = PolePrescription::retarded;

  /// cutoff = 100 max|omega_em|, epsilon = 1e-3 min nonzero |omega_em|.
  static QuadratureSpec defaults_for(const DipoleSpectrum& s);

  /// Basic invariants: cutoff > 0, epsilon > 0, n_nodes >= 64.
  void validate() const;
  /// Additionally: cutoff above every |omega_em|, epsilon well below the
  /// smallest nonzero |omega_em|.
  void validate_for(const DipoleSpectrum& s) const;
};

/// f(omega, t) = (e^{i omega t} - 1)/(i omega); f(0, t) = t exactly.
/// Series branch for |omega t| < 1e-4, cancellation-free closed form beyond.
std::complex<double> f_kernel(double omega, double t);

/// Finite-time spectral line kernel sin(omega tau / 2)/(pi omega), with the
/// value tau/(2 pi) at omega = 0. Even in omega; first zeros at 2 pi / tau.
double delta_tau(double omega, double tau);

/// Result of the regulated delta/PV evaluation at one epsilon.
struct PvDeltaParts {
  double delta_part = 0.0;   // -2 Im B -> 2 pi w(omega0) sgn(omega0) as eps->0
  double bracket_pv = 0.0;   // Re B: the PV piece that cancels against +c.c.
  double direct_pv = 0.0;    // independent symmetric-limit PV quadrature
};

/// B = int_0^cutoff w(omega) [1/(omega-omega0+i eps) - 1/(omega+omega0+i eps)] d omega.
/// Returns the nascent-delta part -2 Im B together with both PV evaluations
/// (they must agree; tested, not enforced here). Requires 0 < |omega0| < cutoff.
PvDeltaParts pv_delta_integral(double omega0, const std::function<double(double)>& w,
                               const QuadratureSpec& spec);

/// Same at a caller-chosen width (used by the extrapolation).
PvDeltaParts pv_delta_integral_at(double omega0, const std::function<double(double)>& w,
                                  const QuadratureSpec& spec, double epsilon);

struct PvDeltaExtrapolated {
  double value = 0.0;           // two-level Richardson limit (eps and eps^3 removed)
  double error_estimate = 0.0;
  std::array<double, 3> epsilons{};  // {10 eps, eps, eps/10}
  std::array<double, 3> values{};
};

PvDeltaExtrapolated pv_delta_extrapolated(double omega0, const std::function<double(double)>& w,
                                          const QuadratureSpec& spec);

/// int_0^cutoff g(omega) r(omega) d omega by panel Gauss-Legendre with panel
/// width <= pi / (4 max(|t_r|, 1)) so each panel resolves the oscillation.
std::complex<double> regulated_oscillatory_integral(
    const std::function<std::complex<double>(double)>& g, double t_r,
    const QuadratureSpec& spec);

/// Raw oscillation-resolving panel quadrature of f over [0, cutoff] (no
/// regulator applied): panel width <= pi/(4 max(|t_r|,1)) and <=
/// smooth_scale/2, with extra geometric refinement around each refine point
/// down to panels of width fine_scale (for integrand features narrower than
/// the oscillation panels, e.g. a Lorentzian-smoothed pole).
std::complex<double> oscillatory_panel_integral(
    const std::function<std::complex<double>(double)>& f, double t_r, double cutoff,
    int n_nodes, int nodes_per_panel, double smooth_scale,
    std::span<const double> refine_points, double fine_scale);

// --- closed forms used for pole subtraction (and as test oracles) ---

/// int_a^b (u + c) e^{-i u t} du.
std::complex<double> linear_phase_integral(double a, double b, std::complex<double> c, double t);

/// int_a^b e^{-i u t} / (u + i eps) du for t >= 0, eps > 0. Via the scaled
/// complex exponential integral; includes the branch crossing term when the
/// interval straddles u = 0.
std::complex<double> pole_phase_integral(double a, double b, double eps, double t);

/// Principal-value limit (eps -> 0) of the above; a < 0 < b or 0 < a < b.
std::complex<double> pole_phase_integral_pv(double a, double b, double t);

}  // namespace dipolerad
