#include "dipolerad/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dipolerad/errors.hpp"
#include "dipolerad/numerics.hpp"

namespace dipolerad {

DipoleTrajectory DipoleTrajectory::harmonic(const Vec3& d0, double omega, double phase) {
  if (!std::isfinite(omega) || !std::isfinite(phase) || !std::isfinite(norm2(d0)))
    throw ConfigError("trajectory: non-finite harmonic parameters");
  DipoleTrajectory tr;
  tr.kind_ = Kind::harmonic;
  tr.d0_ = d0;
  tr.omega_ = omega;
  tr.phase_ = phase;
  return tr;
}

DipoleTrajectory DipoleTrajectory::tabulated(double dt, std::vector<Vec3> samples) {
  if (!(dt > 0.0)) throw ConfigError("trajectory: dt must be > 0");
  const std::size_t n = samples.size();
  if (n < 6) throw ConfigError("trajectory: tabulated input needs at least 6 samples");
  for (const auto& s : samples)
    if (!std::isfinite(norm2(s))) throw ConfigError("trajectory: non-finite sample");

  DipoleTrajectory tr;
  tr.kind_ = Kind::tabulated;
  tr.dt_ = dt;
  tr.samples_ = std::move(samples);
  tr.deriv1_.resize(n);
  tr.deriv2_.resize(n);

  // 4th-order stencils on unit spacing: centered 5-point in the interior,
  // shifted 6-point at the edges, weights from the Fornberg recurrence.
  auto stencil_at = [&](std::size_t i) {
    std::size_t s0, len;
    if (i >= 2 && i + 2 < n) {
      s0 = i - 2;
      len = 5;
    } else if (i < 2) {
      s0 = 0;
      len = 6;
    } else {
      s0 = n - 6;
      len = 6;
    }
    std::vector<double> x(len);
    for (std::size_t k = 0; k < len; ++k) x[k] = static_cast<double>(s0 + k);
    return std::make_pair(s0, fornberg_weights(static_cast<double>(i), x, 2));
  };

  for (std::size_t i = 0; i < n; ++i) {
    const auto [s0, w] = stencil_at(i);
    Vec3 g1{}, g2{};
    for (std::size_t k = 0; k < w[1].size(); ++k) {
      g1 += w[1][k] * tr.samples_[s0 + k];
      g2 += w[2][k] * tr.samples_[s0 + k];
    }
    tr.deriv1_[i] = g1 / dt;
    tr.deriv2_[i] = g2 / (dt * dt);
  }
  return tr;
}

DipoleTrajectory DipoleTrajectory::from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("trajectory: JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("trajectory: must be an object");
  const auto type = j.value("type", std::string());
  auto vec3_of = [](const nlohmann::json& arr, const std::string& path) -> Vec3 {
    if (!arr.is_array() || arr.size() != 3)
      throw ConfigError(path + ": must be an array of 3 numbers");
    for (const auto& c : arr)
      if (!c.is_number()) throw ConfigError(path + ": must be an array of 3 numbers");
    return {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
  };
  if (type == "harmonic") {
    if (!j.contains("d0") || !j.contains("omega"))
      throw ConfigError("trajectory: harmonic requires 'd0' and 'omega'");
    const Vec3 d0 = vec3_of(j.at("d0"), "trajectory.d0");
    if (!j.at("omega").is_number()) throw ConfigError("trajectory.omega: must be a number");
    double phase = 0.0;
    if (j.contains("phase")) {
      if (!j.at("phase").is_number()) throw ConfigError("trajectory.phase: must be a number");
      phase = j.at("phase").get<double>();
    }
    return harmonic(d0, j.at("omega").get<double>(), phase);
  }
  if (type == "tabulated") {
    if (!j.contains("dt") || !j.contains("samples"))
      throw ConfigError("trajectory: tabulated requires 'dt' and 'samples'");
    if (!j.at("dt").is_number()) throw ConfigError("trajectory.dt: must be a number");
    const auto& arr = j.at("samples");
    if (!arr.is_array()) throw ConfigError("trajectory.samples: must be an array");
    std::vector<Vec3> samples;
    samples.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i)
      samples.push_back(vec3_of(arr[i], "trajectory.samples[" + std::to_string(i) + "]"));
    return tabulated(j.at("dt").get<double>(), std::move(samples));
  }
  throw ConfigError("trajectory.type: must be 'harmonic' or 'tabulated'");
}

Vec3 DipoleTrajectory::interpolate(const std::vector<Vec3>& table, double t) const {
  const std::size_t n = table.size();
  const double s = t / dt_;
  if (s < -1e-9 || s > static_cast<double>(n - 1) + 1e-9)
    throw std::invalid_argument("trajectory: query outside tabulated window");
  // cubic Lagrange on the 4 nearest nodes
  long j = static_cast<long>(std::floor(s)) - 1;
  j = std::max(0l, std::min(j, static_cast<long>(n) - 4));
  const double u = s - static_cast<double>(j);
  double L[4];
  static const double den[4] = {-6.0, 2.0, -2.0, 6.0};  // prod_{k!=i}(i-k)
  for (int i = 0; i < 4; ++i) {
    double p = 1.0;
    for (int k = 0; k < 4; ++k)
      if (k != i) p *= (u - k);
    L[i] = p / den[i];
  }
  Vec3 out{};
  for (int i = 0; i < 4; ++i) out += L[i] * table[j + i];
  return out;
}

Vec3 DipoleTrajectory::value(double t) const {
  if (kind_ == Kind::harmonic) return d0_ * std::cos(omega_ * t + phase_);
  return interpolate(samples_, t);
}

Vec3 DipoleTrajectory::d1(double t) const {
  if (kind_ == Kind::harmonic) return d0_ * (-omega_ * std::sin(omega_ * t + phase_));
  return interpolate(deriv1_, t);
}

Vec3 DipoleTrajectory::d2(double t) const {
  if (kind_ == Kind::harmonic) return d0_ * (-omega_ * omega_ * std::cos(omega_ * t + phase_));
  return interpolate(deriv2_, t);
}

}  // namespace dipolerad
