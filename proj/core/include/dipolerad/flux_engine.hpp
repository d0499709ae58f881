#pragma once
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "dipolerad/geometry.hpp"
#include "dipolerad/quadrature.hpp"
#include "dipolerad/spectrum.hpp"

namespace dipolerad {

/// All densities below are returned x^2-scaled (the explicit 1/x^2 radiation
/// prefactor divided out); FluxDensityBreakdown reattaches it at a radius.

/// sum_m sum_lambda |e_lambda . d_em|^2 omega_em^4 / (16 pi^2), over every
/// level m coupled to the excited one (both signs of omega_em contribute).
double first_order_density(const DipoleSpectrum& s, const Vec3& xhat);

/// Per-transition terms of the above, keyed by the lower level index.
struct DensityTerm {
  std::size_t m = 0;
  double value = 0.0;
};
std::vector<DensityTerm> first_order_terms(const DipoleSpectrum& s, const Vec3& xhat);

/// Time-independent second-order density, analytic form: each first-order
/// term times sgn(omega_em), with sgn(0) = 0. Upward terms cancel their
/// first-order counterparts exactly (bitwise: same product negated).
double real_second_order_density_analytic(const DipoleSpectrum& s, const Vec3& xhat);
std::vector<DensityTerm> real_second_order_terms_analytic(const DipoleSpectrum& s,
                                                          const Vec3& xhat);

struct RealSecondOrderDensity {
  double analytic = 0.0;
  double pv_numeric = 0.0;  // epsilon-extrapolated nascent-delta route
  double pv_error = 0.0;
};

/// Both evaluation routes of the time-independent second-order density.
RealSecondOrderDensity real_second_order_density(const DipoleSpectrum& s, const Vec3& xhat,
                                                 const QuadratureSpec& spec);

/// Full second-order frequency integrand: omega^2 e^{-i omega t_r} times the
/// second time-derivative of the interaction bracket. Entire in omega; the
/// apparent poles at omega = +-omega_em are removable and this form never
/// forms them:
///   I = 2 i omega^2 omega_em
///       - omega^2 omega_em^2 [ f(omega_em - omega, t_r) - f(-(omega + omega_em), t_r) ].
std::complex<double> second_order_integrand(double omega, double omega_em, double t_r);

/// The same integrand split into its time-independent and oscillatory pieces
/// (pole form; diverges at omega = +-|omega_em|, caller samples away).
struct IntegrandSplit {
  std::complex<double> time_independent;
  std::complex<double> oscillatory;
};
IntegrandSplit second_order_integrand_split(double omega, double omega_em, double t_r);

/// Sphere integral of x^2 (first-order + analytic second-order) density;
/// equals sum_{m<e} omega_em^4 |d_em|^2 / (3 pi).
double total_real_flux(const DipoleSpectrum& s, const SphericalGrid& grid,
                       const QuadratureSpec& spec);

struct VirtualFluxSample {
  double t = 0.0;
  double t_r = 0.0;
  double value = 0.0;
  double imag_residual = 0.0;  // |Im(expr + c.c.)|
};

/// Oscillatory (virtual) radiated power at lab time t on the sphere of the
/// given radius; t >= radius required so the retarded time is nonnegative.
VirtualFluxSample virtual_flux(const DipoleSpectrum& s, double radius, double t,
                               const SphericalGrid& grid, const QuadratureSpec& spec);

struct VirtualFluxSeries {
  std::vector<VirtualFluxSample> samples;
};

VirtualFluxSeries virtual_flux_series(const DipoleSpectrum& s, double radius,
                                      std::span<const double> times, const SphericalGrid& grid,
                                      const QuadratureSpec& spec);

/// (1/T) int_0^T P dt by trapezoid on the sampled series (times measured from
/// the first sample; the final partial segment is linearly interpolated).
double time_average(std::span<const double> times, std::span<const double> values, double T);

struct RunningAveragePoint {
  double T = 0.0;
  double average = 0.0;
};

/// Streaming running average of the virtual flux over retarded times [0, t_max]
/// sampled at dt: A(T) = (1/T) int_0^T P_virtual dt_r reported at fixed
/// internal block boundaries. Deterministic for any thread count.
std::vector<RunningAveragePoint> virtual_flux_running_average(
    const DipoleSpectrum& s, const SphericalGrid& grid, const QuadratureSpec& spec,
    double t_max, double dt);

/// Densities at one direction with the 1/x^2 prefactor attached.
struct FluxDensityBreakdown {
  Vec3 direction;
  double radius = 0.0;
  double first_order = 0.0;
  double real_second_order = 0.0;
  std::vector<double> times;            // lab times
  std::vector<double> virtual_density;  // same 1/x^2 scaling
};

FluxDensityBreakdown flux_density_breakdown(const DipoleSpectrum& s, const Vec3& xhat,
                                            double radius, std::span<const double> times,
                                            const QuadratureSpec& spec);

struct FluxReport {
  RealFluxBreakdown real_spectrum_path;  // sum Gamma omega_em
  double real_quadrature_path = 0.0;     // angular quadrature route
  double radius = 0.0;
  VirtualFluxSeries virtual_series;
  double virtual_time_average = 0.0;
  double average_window = 0.0;
  double cutoff_sensitivity = 0.0;  // max |P_v(Omega) - P_v(Omega/2)| / max|P_v|
  QuadratureSpec spec;
};

/// Assembles the full report; enforces agreement of the two real-flux routes
/// to 1e-10 relative.
FluxReport make_flux_report(const DipoleSpectrum& s, const SphericalGrid& grid,
                            const QuadratureSpec& spec, double radius,
                            std::span<const double> times);

}  // namespace dipolerad
