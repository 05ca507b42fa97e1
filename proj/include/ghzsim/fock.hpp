#pragma once

#include <complex>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace ghzsim {

using Amplitude = std::complex<double>;

inline constexpr double kDefaultPruneTolerance = 1e-14;

/// Raised when a state with zero norm is normalized or measured.
class ZeroNormError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class ModeKind : std::uint8_t {
  EnsembleR,
  EnsembleL,
  PhotonH,
  PhotonV,
  DetectorH,
  DetectorV,
  Loss,
};

/// A bosonic mode: kind plus a 1-based channel index. Ordered by kind, then index.
struct ModeId {
  ModeKind kind = ModeKind::PhotonH;
  int channel = 1;

  friend constexpr auto operator<=>(const ModeId&, const ModeId&) = default;

  std::string label() const;
  static ModeId parse(std::string_view label);
};

namespace modes {
inline ModeId r(int c) { return {ModeKind::EnsembleR, c}; }
inline ModeId l(int c) { return {ModeKind::EnsembleL, c}; }
inline ModeId h(int c) { return {ModeKind::PhotonH, c}; }
inline ModeId v(int c) { return {ModeKind::PhotonV, c}; }
inline ModeId dh(int c) { return {ModeKind::DetectorH, c}; }
inline ModeId dv(int c) { return {ModeKind::DetectorV, c}; }
inline ModeId loss(int c) { return {ModeKind::Loss, c}; }
}  // namespace modes

/// Occupation-number vector in canonical form: sorted by mode, no zero entries.
class FockBasisState {
 public:
  using Entry = std::pair<ModeId, unsigned>;

  FockBasisState() = default;
  /// Throws std::invalid_argument on negative counts.
  explicit FockBasisState(const std::map<ModeId, int>& occupations);

  unsigned occupation(ModeId m) const;
  unsigned total() const;
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  FockBasisState with(ModeId m, unsigned count) const;

  friend auto operator<=>(const FockBasisState&, const FockBasisState&) = default;
  friend bool operator==(const FockBasisState&, const FockBasisState&) = default;

  std::string label() const;

 private:
  std::vector<Entry> entries_;
};

/// Sparse superposition of basis states. Immutable once built; may be unnormalized.
class Ket {
 public:
  using Terms = std::map<FockBasisState, Amplitude>;

  Ket() = default;
  explicit Ket(Terms terms, double prune_tolerance = kDefaultPruneTolerance);

  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  double prune_tolerance() const { return prune_tolerance_; }

  /// Amplitude of a basis state, zero if absent.
  Amplitude amplitude(const FockBasisState& s) const;

  Ket scaled(Amplitude factor) const;

 private:
  Terms terms_;
  double prune_tolerance_ = kDefaultPruneTolerance;
};

Ket basis_ket(const std::map<ModeId, int>& occupations);
Ket vacuum();

Ket apply_creation(const Ket& ket, ModeId m);
Ket apply_annihilation(const Ket& ket, ModeId m);

/// <a|b>, conjugate-linear in the first argument.
Amplitude inner_product(const Ket& a, const Ket& b);
double norm_sq(const Ket& ket);
Ket normalize(const Ket& ket);

Ket add(const Ket& a, const Ket& b);
Ket tensor(const Ket& a, const Ket& b);

using SectorPredicate = std::function<bool(const FockBasisState&)>;
Ket project_sector(const Ket& ket, const SectorPredicate& keep);

/// Modes carrying at least one photon in some term.
std::vector<ModeId> occupied_modes(const Ket& ket);

/// Array of {"occupations": {label: count}, "re", "im"}, terms and modes in canonical order.
nlohmann::ordered_json to_json(const Ket& ket);
Ket ket_from_json(const nlohmann::json& doc);

}  // namespace ghzsim
