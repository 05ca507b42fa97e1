#pragma once

#include <string>
#include <vector>

#include "ghzsim/fock.hpp"
#include "ghzsim/optics.hpp"

namespace ghzsim {

/// n-photon GHZ analyzer on photon channels first_channel .. first_channel+n-1, read out
/// at detector stations 1..n:
///   h_{p_i} -> (Dh_i + Dv_i) / sqrt(2),   v_{p_i} -> (Dh_{i-1} - Dv_{i-1}) / sqrt(2),
/// with station 0 identified with station n.
ModeUnitary ghz_analyzer_unitary(int n, int first_channel = 1);

/// The same network assembled from optical elements: a chain of PBSs that shifts every
/// v-mode one path back (cyclically), a 45-degree half-wave plate on every path, then the
/// path-to-detector relabeling.
ModeUnitary ghz_analyzer_from_elements(int n, int first_channel = 1);

/// Detector modes Dh_1, Dv_1, ..., Dh_n, Dv_n in canonical order.
std::vector<ModeId> detector_modes(int n);

PatternClass classify_pattern(const ClickPattern& pattern, int n);
std::string to_string(PatternClass c);

/// Runs the analyzer on the photon modes of the given channels and measures every detector.
/// Modes outside the analyzer (ensembles, other photons) are carried into the branches.
std::vector<OutcomeBranch> enumerate_outcomes(const Ket& ket, int n, const DetectorModel& model,
                                              int first_channel = 1);

/// Photonic GHZ states (prod h +/- prod v)/sqrt(2) on channels first..first+n-1.
Ket photon_ghz(int n, int sign, int first_channel = 1);
/// Ensemble GHZ states (prod r +/- prod l)/sqrt(2) on ensembles 1..n.
Ket ensemble_ghz(int n, int sign);

enum class BellState { PhiPlus, PhiMinus, PsiPlus, PsiMinus };
enum class BellClass { PhiPlus, PhiMinus, Psi, Unresolved };

std::string to_string(BellState s);
std::string to_string(BellClass c);
Ket bell_state(BellState s);

/// Class of a two-photon analyzer branch list: all even one-per-station patterns (PhiPlus),
/// all odd ones (PhiMinus), all photons at a single station (Psi), anything else Unresolved.
/// Throws std::invalid_argument when the branches do not come from a two-station analyzer.
BellClass bell_classes(const std::vector<OutcomeBranch>& branches);

struct BellRow {
  BellState input;
  BellClass cls;
  std::vector<OutcomeBranch> branches;
};

/// Feeds each of the four Bell states through the n=2 analyzer.
std::vector<BellRow> bell_table(const DetectorModel& model);

/// Moves r_c -> h_{c+offset}, l_c -> v_{c+offset} for every listed channel c.
/// Throws std::invalid_argument when a target photon mode is already occupied.
Ket transfer_ensemble_to_photons(const Ket& ket, const std::vector<int>& channels, int readout_offset);

/// Measures ensembles 1..n in the |N>^+/- basis by transferring them onto readout photons
/// (channels n+1..2n) and running those through the analyzer. Branch kets live on the
/// Stokes-photon modes.
std::vector<OutcomeBranch> project_N_basis(const Ket& ket, int n, const DetectorModel& model);

/// True when each of parties 1..n holds exactly one excitation among the given two kinds.
bool one_per_party(const FockBasisState& s, int n, ModeKind a, ModeKind b);

}  // namespace ghzsim
