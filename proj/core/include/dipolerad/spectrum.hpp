#pragma once
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dipolerad/vec3.hpp"

namespace dipolerad {

/// Natural units throughout: hbar = c = eps0 = mu0 = 1.

struct Level {
  std::string label;
  double energy = 0.0;
};

struct DipoleEntry {
  std::string from;
  std::string to;
  CVec3 d;
};

/// Raw spectrum data as supplied by the user, before validation.
struct RawSpectrum {
  std::vector<Level> levels;
  std::vector<DipoleEntry> dipoles;
  std::string excited;
};

/// One directed transition n -> m with omega_em = w_n - w_m and matrix
/// element d_nm. omega_em equals the stored level-energy difference exactly.
struct Transition {
  std::size_t from = 0;
  std::size_t to = 0;
  std::string from_label;
  std::string to_label;
  double omega_em = 0.0;
  CVec3 d_em;
};

/// Validated dipole spectrum: level energies, excited state, and a Hermitian
/// dipole matrix (d_mn = conj(d_nm) holds exactly on the exposed view; only
/// the lower-index triangle is stored). Immutable after validation; all
/// operations are pure and safe for concurrent reads.
class DipoleSpectrum {
 public:
  /// Checks labels, energies, Hermiticity of explicitly stored pairs
  /// (mismatch beyond 1e-12 relative is an error) and the excited label,
  /// then symmetrizes the dipole map.
  static DipoleSpectrum validate(const RawSpectrum& raw);

  /// Parses the JSON document
  ///   {"levels":[{"label","energy"}...],
  ///    "dipoles":[{"from","to","re":[3],"im":[3]}...],
  ///    "excited":"label"}
  /// ("im" may be omitted for real elements) and validates it.
  static DipoleSpectrum from_json_text(std::string_view text);

  const std::vector<Level>& levels() const { return levels_; }
  std::size_t excited_index() const { return excited_; }
  const std::string& excited_label() const { return levels_[excited_].label; }
  double energy(std::size_t i) const { return levels_[i].energy; }
  std::optional<std::size_t> index_of(std::string_view label) const;

  /// Hermitian view; zero vector if the pair has no stored element.
  CVec3 dipole(std::size_t n, std::size_t m) const;
  bool has_dipole(std::size_t n, std::size_t m) const;

  /// All stored directed transitions (both directions of each stored pair).
  std::vector<Transition> transitions() const;
  /// Directed transitions out of the excited level (every m with a stored
  /// element, both signs of omega_em).
  std::vector<Transition> transitions_from_excited() const;

 private:
  DipoleSpectrum() = default;
  std::vector<Level> levels_;
  std::map<std::pair<std::size_t, std::size_t>, CVec3> dipoles_;  // key: (lo, hi)
  std::size_t excited_ = 0;
};

/// Spontaneous emission rate Gamma = omega_em^3 |d_em|^2 / (3 pi) for a
/// downward transition. Throws std::invalid_argument if omega_em <= 0.
double gamma_rate(const Transition& t);

struct RealFluxTerm {
  std::string to;
  double omega_em = 0.0;
  double gamma = 0.0;
  double power = 0.0;  // Gamma * omega_em
};

struct RealFluxBreakdown {
  double total = 0.0;
  std::vector<RealFluxTerm> terms;
};

/// Real radiated power P = sum_{m<e} Gamma_{e->m} omega_em. Degenerate
/// transitions (omega_em == 0) appear in the breakdown with zero rate and
/// power; upward transitions are excluded.
RealFluxBreakdown real_flux(const DipoleSpectrum& s);

}  // namespace dipolerad
