#include "dipolerad/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dipolerad/errors.hpp"
#include "dipolerad/numerics.hpp"

namespace dipolerad {

namespace {

bool finite(const CVec3& v) {
  return std::isfinite(v.x.real()) && std::isfinite(v.x.imag()) && std::isfinite(v.y.real()) &&
         std::isfinite(v.y.imag()) && std::isfinite(v.z.real()) && std::isfinite(v.z.imag());
}

/// Relative mismatch of a against conj(b), scale-free for tiny elements.
double hermiticity_mismatch(const CVec3& a, const CVec3& b) {
  const CVec3 diff = a - conj(b);
  const double scale = std::max({norm(a), norm(b), 1e-300});
  return norm(diff) / scale;
}

}  // namespace

DipoleSpectrum DipoleSpectrum::validate(const RawSpectrum& raw) {
  DipoleSpectrum s;
  if (raw.levels.empty()) throw ConfigError("spectrum: at least one level is required");

  std::set<std::string> seen;
  for (const auto& lvl : raw.levels) {
    if (!std::isfinite(lvl.energy))
      throw ConfigError("spectrum: level '" + lvl.label + "' has non-finite energy");
    if (!seen.insert(lvl.label).second)
      throw ConfigError("spectrum: duplicate level label '" + lvl.label + "'");
  }
  s.levels_ = raw.levels;

  auto index_of = [&](const std::string& label) -> std::size_t {
    for (std::size_t i = 0; i < s.levels_.size(); ++i)
      if (s.levels_[i].label == label) return i;
    throw ConfigError("spectrum: unknown level label '" + label + "'");
  };

  // Collect directed entries, then close under Hermiticity.
  std::map<std::pair<std::size_t, std::size_t>, CVec3> directed;
  for (const auto& e : raw.dipoles) {
    const std::size_t n = index_of(e.from);
    const std::size_t m = index_of(e.to);
    if (!finite(e.d))
      throw ConfigError("spectrum: non-finite dipole element " + e.from + "->" + e.to);
    if (!directed.emplace(std::make_pair(n, m), e.d).second)
      throw ConfigError("spectrum: duplicate dipole entry " + e.from + "->" + e.to);
  }
  for (const auto& [key, d] : directed) {
    const auto [n, m] = key;
    if (n == m) {
      // diagonal moment: Hermiticity forces it real
      if (hermiticity_mismatch(d, d) > 1e-12)
        throw ConfigError("spectrum: diagonal dipole element for '" + s.levels_[n].label +
                          "' must be real");
      s.dipoles_[{n, m}] = d;
      continue;
    }
    const auto rev = directed.find({m, n});
    if (rev != directed.end() && hermiticity_mismatch(rev->second, d) > 1e-12)
      throw ConfigError("spectrum: non-Hermitian dipole pair " + s.levels_[n].label + "<->" +
                        s.levels_[m].label);
    const auto lo = std::min(n, m), hi = std::max(n, m);
    s.dipoles_[{lo, hi}] = (n < m) ? d : conj(d);
  }

  bool found = false;
  for (std::size_t i = 0; i < s.levels_.size(); ++i) {
    if (s.levels_[i].label == raw.excited) {
      s.excited_ = i;
      found = true;
      break;
    }
  }
  if (!found) throw ConfigError("spectrum: excited level '" + raw.excited + "' not found");
  return s;
}

DipoleSpectrum DipoleSpectrum::from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("spectrum: JSON parse error: ") + e.what());
  }

  auto require = [](const nlohmann::json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) throw ConfigError(path + ": missing key '" + key + "'");
    return obj.at(key);
  };
  auto check_keys = [](const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                       const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find_if(allowed.begin(), allowed.end(),
                       [&](const char* k) { return it.key() == k; }) == allowed.end())
        throw ConfigError(path + ": unknown key '" + it.key() + "'");
    }
  };

  if (!j.is_object()) throw ConfigError("spectrum: top level must be an object");
  check_keys(j, {"levels", "dipoles", "excited"}, "spectrum");

  RawSpectrum raw;
  const auto& levels = require(j, "levels", "spectrum");
  if (!levels.is_array()) throw ConfigError("spectrum.levels: must be an array");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::string path = "spectrum.levels[" + std::to_string(i) + "]";
    const auto& lv = levels[i];
    if (!lv.is_object()) throw ConfigError(path + ": must be an object");
    check_keys(lv, {"label", "energy"}, path);
    const auto& lab = require(lv, "label", path);
    const auto& en = require(lv, "energy", path);
    if (!lab.is_string()) throw ConfigError(path + ".label: must be a string");
    if (!en.is_number()) throw ConfigError(path + ".energy: must be a number");
    raw.levels.push_back({lab.get<std::string>(), en.get<double>()});
  }

  auto vec3_of = [](const nlohmann::json& arr, const std::string& path) -> Vec3 {
    if (!arr.is_array() || arr.size() != 3) throw ConfigError(path + ": must be an array of 3 numbers");
    for (const auto& c : arr)
      if (!c.is_number()) throw ConfigError(path + ": must be an array of 3 numbers");
    return {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
  };

  if (j.contains("dipoles")) {
    const auto& dipoles = j.at("dipoles");
    if (!dipoles.is_array()) throw ConfigError("spectrum.dipoles: must be an array");
    for (std::size_t i = 0; i < dipoles.size(); ++i) {
      const std::string path = "spectrum.dipoles[" + std::to_string(i) + "]";
      const auto& dp = dipoles[i];
      if (!dp.is_object()) throw ConfigError(path + ": must be an object");
      check_keys(dp, {"from", "to", "re", "im"}, path);
      const auto& from = require(dp, "from", path);
      const auto& to = require(dp, "to", path);
      if (!from.is_string()) throw ConfigError(path + ".from: must be a string");
      if (!to.is_string()) throw ConfigError(path + ".to: must be a string");
      const Vec3 re = vec3_of(require(dp, "re", path), path + ".re");
      Vec3 im{};
      if (dp.contains("im")) im = vec3_of(dp.at("im"), path + ".im");
      CVec3 d{{re.x, im.x}, {re.y, im.y}, {re.z, im.z}};
      raw.dipoles.push_back({from.get<std::string>(), to.get<std::string>(), d});
    }
  }

  const auto& exc = require(j, "excited", "spectrum");
  if (!exc.is_string()) throw ConfigError("spectrum.excited: must be a string");
  raw.excited = exc.get<std::string>();
  return validate(raw);
}

std::optional<std::size_t> DipoleSpectrum::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < levels_.size(); ++i)
    if (levels_[i].label == label) return i;
  return std::nullopt;
}

CVec3 DipoleSpectrum::dipole(std::size_t n, std::size_t m) const {
  const auto lo = std::min(n, m), hi = std::max(n, m);
  const auto it = dipoles_.find({lo, hi});
  if (it == dipoles_.end()) return {};
  return (n <= m) ? it->second : conj(it->second);
}

bool DipoleSpectrum::has_dipole(std::size_t n, std::size_t m) const {
  return dipoles_.count({std::min(n, m), std::max(n, m)}) > 0;
}

std::vector<Transition> DipoleSpectrum::transitions() const {
  std::vector<Transition> out;
  for (const auto& [key, d] : dipoles_) {
    const auto [lo, hi] = key;
    if (lo == hi) continue;
    out.push_back({lo, hi, levels_[lo].label, levels_[hi].label,
                   levels_[lo].energy - levels_[hi].energy, d});
    out.push_back({hi, lo, levels_[hi].label, levels_[lo].label,
                   levels_[hi].energy - levels_[lo].energy, conj(d)});
  }
  return out;
}

std::vector<Transition> DipoleSpectrum::transitions_from_excited() const {
  std::vector<Transition> out;
  for (auto& t : transitions())
    if (t.from == excited_) out.push_back(std::move(t));
  return out;
}

double gamma_rate(const Transition& t) {
  if (!(t.omega_em > 0.0))
    throw std::invalid_argument("gamma_rate: defined for downward transitions (omega_em > 0)");
  const double w3 = t.omega_em * t.omega_em * t.omega_em;
  return w3 * norm2(t.d_em) / (3.0 * std::numbers::pi);
}

RealFluxBreakdown real_flux(const DipoleSpectrum& s) {
  RealFluxBreakdown out;
  std::vector<double> powers;
  for (const auto& t : s.transitions_from_excited()) {
    if (t.omega_em < 0.0) continue;
    RealFluxTerm term;
    term.to = t.to_label;
    term.omega_em = t.omega_em;
    term.gamma = (t.omega_em > 0.0) ? gamma_rate(t) : 0.0;
    term.power = term.gamma * term.omega_em;
    powers.push_back(term.power);
    out.terms.push_back(std::move(term));
  }
  out.total = pairwise_sum(powers);
  return out;
}

}  // namespace dipolerad
