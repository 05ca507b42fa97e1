#include "ghzsim/analyzer.hpp"

#include <cmath>
#include <numbers>

namespace ghzsim {

namespace {

void require_parties(int n) {
  if (n < 2) throw std::invalid_argument("the GHZ analyzer needs n >= 2");
}

int previous_station(int i, int n) { return i == 1 ? n : i - 1; }

}  // namespace

ModeUnitary ghz_analyzer_unitary(int n, int first_channel) {
  require_parties(n);
  const auto k = static_cast<std::size_t>(2 * n);
  std::vector<ModeId> inputs, outputs;
  for (int i = 1; i <= n; ++i) {
    inputs.push_back(modes::h(first_channel + i - 1));
    inputs.push_back(modes::v(first_channel + i - 1));
    outputs.push_back(modes::dh(i));
    outputs.push_back(modes::dv(i));
  }
  const double s = std::numbers::sqrt2 / 2.0;
  std::vector<Amplitude> m(k * k);
  auto set = [&](std::size_t row, std::size_t col, double x) { m[row * k + col] = x; };
  for (int i = 1; i <= n; ++i) {
    const auto h_col = static_cast<std::size_t>(2 * (i - 1));
    const auto v_col = h_col + 1;
    const auto here = static_cast<std::size_t>(2 * (i - 1));
    const auto prev = static_cast<std::size_t>(2 * (previous_station(i, n) - 1));
    set(here, h_col, s);
    set(here + 1, h_col, s);
    set(prev, v_col, s);
    set(prev + 1, v_col, -s);
  }
  return ModeUnitary(std::move(inputs), std::move(outputs), std::move(m));
}

ModeUnitary ghz_analyzer_from_elements(int n, int first_channel) {
  require_parties(n);
  auto ch = [&](int i) { return first_channel + i - 1; };
  ModeUnitary net = pbs(modes::h(ch(1)), modes::v(ch(1)), modes::h(ch(2)), modes::v(ch(2)));
  for (int i = 2; i < n; ++i) {
    net = compose(net, pbs(modes::h(ch(i)), modes::v(ch(i)), modes::h(ch(i + 1)), modes::v(ch(i + 1))));
  }
  std::vector<ModeId> paths, stations;
  for (int i = 1; i <= n; ++i) {
    net = compose(net, hwp45(modes::h(ch(i)), modes::v(ch(i))));
    paths.push_back(modes::h(ch(i)));
    paths.push_back(modes::v(ch(i)));
    stations.push_back(modes::dh(i));
    stations.push_back(modes::dv(i));
  }
  return compose(net, relabel(std::move(paths), std::move(stations)));
}

std::vector<ModeId> detector_modes(int n) {
  std::vector<ModeId> out;
  for (int i = 1; i <= n; ++i) out.push_back(modes::dh(i));
  for (int i = 1; i <= n; ++i) out.push_back(modes::dv(i));
  return out;
}

PatternClass classify_pattern(const ClickPattern& pattern, int n) {
  if (pattern.fired() != static_cast<std::size_t>(n)) return PatternClass::Other;
  std::vector<int> per_station(static_cast<std::size_t>(n) + 1, 0);
  int v_clicks = 0;
  for (const auto& [mode, count] : pattern.clicks()) {
    if (count != 1) return PatternClass::Other;
    if (mode.kind != ModeKind::DetectorH && mode.kind != ModeKind::DetectorV) return PatternClass::Other;
    if (mode.channel < 1 || mode.channel > n) return PatternClass::Other;
    if (++per_station[static_cast<std::size_t>(mode.channel)] > 1) return PatternClass::Other;
    if (mode.kind == ModeKind::DetectorV) ++v_clicks;
  }
  return v_clicks % 2 == 0 ? PatternClass::MPlus : PatternClass::MMinus;
}

std::string to_string(PatternClass c) {
  switch (c) {
    case PatternClass::MPlus: return "MPlus";
    case PatternClass::MMinus: return "MMinus";
    case PatternClass::Other: return "Other";
  }
  return "?";
}

std::vector<OutcomeBranch> enumerate_outcomes(const Ket& ket, int n, const DetectorModel& model,
                                              int first_channel) {
  auto analyzed = apply_mode_unitary(ket, ghz_analyzer_unitary(n, first_channel));
  auto branches = measure_modes(analyzed, detector_modes(n), model);
  for (auto& b : branches) b.cls = classify_pattern(b.pattern, n);
  return branches;
}

Ket photon_ghz(int n, int sign, int first_channel) {
  std::map<ModeId, int> all_h, all_v;
  for (int i = 0; i < n; ++i) {
    all_h[modes::h(first_channel + i)] = 1;
    all_v[modes::v(first_channel + i)] = 1;
  }
  const double s = std::numbers::sqrt2 / 2.0;
  return add(basis_ket(all_h).scaled(s), basis_ket(all_v).scaled(sign >= 0 ? s : -s));
}

Ket ensemble_ghz(int n, int sign) {
  std::map<ModeId, int> all_r, all_l;
  for (int i = 1; i <= n; ++i) {
    all_r[modes::r(i)] = 1;
    all_l[modes::l(i)] = 1;
  }
  const double s = std::numbers::sqrt2 / 2.0;
  return add(basis_ket(all_r).scaled(s), basis_ket(all_l).scaled(sign >= 0 ? s : -s));
}

std::string to_string(BellState s) {
  switch (s) {
    case BellState::PhiPlus: return "PhiPlus";
    case BellState::PhiMinus: return "PhiMinus";
    case BellState::PsiPlus: return "PsiPlus";
    case BellState::PsiMinus: return "PsiMinus";
  }
  return "?";
}

std::string to_string(BellClass c) {
  switch (c) {
    case BellClass::PhiPlus: return "PhiPlus";
    case BellClass::PhiMinus: return "PhiMinus";
    case BellClass::Psi: return "Psi";
    case BellClass::Unresolved: return "Unresolved";
  }
  return "?";
}

Ket bell_state(BellState s) {
  using modes::h, modes::v;
  const double a = std::numbers::sqrt2 / 2.0;
  auto pair = [](ModeId x, ModeId y) { return basis_ket({{x, 1}, {y, 1}}); };
  switch (s) {
    case BellState::PhiPlus: return add(pair(h(1), h(2)).scaled(a), pair(v(1), v(2)).scaled(a));
    case BellState::PhiMinus: return add(pair(h(1), h(2)).scaled(a), pair(v(1), v(2)).scaled(-a));
    case BellState::PsiPlus: return add(pair(h(1), v(2)).scaled(a), pair(v(1), h(2)).scaled(a));
    case BellState::PsiMinus: return add(pair(h(1), v(2)).scaled(a), pair(v(1), h(2)).scaled(-a));
  }
  throw std::invalid_argument("unknown Bell state");
}

BellClass bell_classes(const std::vector<OutcomeBranch>& branches) {
  bool all_plus = true, all_minus = true, all_single_station = true;
  for (const auto& b : branches) {
    int station = 0;
    for (const auto& [mode, count] : b.pattern.clicks()) {
      if (mode.kind != ModeKind::DetectorH && mode.kind != ModeKind::DetectorV) {
        throw std::invalid_argument("bell_classes: non-detector mode in pattern");
      }
      if (mode.channel > 2) throw std::invalid_argument("bell_classes: requires a two-station analyzer");
      if (station != 0 && station != mode.channel) all_single_station = false;
      station = mode.channel;
    }
    if (b.pattern.fired() == 0) all_single_station = false;
    PatternClass c = classify_pattern(b.pattern, 2);
    all_plus = all_plus && c == PatternClass::MPlus;
    all_minus = all_minus && c == PatternClass::MMinus;
  }
  if (branches.empty()) return BellClass::Unresolved;
  if (all_plus) return BellClass::PhiPlus;
  if (all_minus) return BellClass::PhiMinus;
  if (all_single_station) return BellClass::Psi;
  return BellClass::Unresolved;
}

std::vector<BellRow> bell_table(const DetectorModel& model) {
  std::vector<BellRow> rows;
  for (BellState s : {BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus}) {
    auto branches = enumerate_outcomes(bell_state(s), 2, model);
    BellClass cls = bell_classes(branches);
    rows.push_back({s, cls, std::move(branches)});
  }
  return rows;
}

Ket transfer_ensemble_to_photons(const Ket& ket, const std::vector<int>& channels, int readout_offset) {
  std::vector<ModeId> from, to;
  for (int c : channels) {
    from.push_back(modes::r(c));
    from.push_back(modes::l(c));
    to.push_back(modes::h(c + readout_offset));
    to.push_back(modes::v(c + readout_offset));
  }
  return apply_mode_unitary(ket, relabel(std::move(from), std::move(to)));
}

std::vector<OutcomeBranch> project_N_basis(const Ket& ket, int n, const DetectorModel& model) {
  require_parties(n);
  std::vector<int> channels;
  for (int i = 1; i <= n; ++i) channels.push_back(i);
  auto readout = transfer_ensemble_to_photons(ket, channels, n);
  return enumerate_outcomes(readout, n, model, n + 1);
}

bool one_per_party(const FockBasisState& s, int n, ModeKind a, ModeKind b) {
  for (int i = 1; i <= n; ++i) {
    if (s.occupation({a, i}) + s.occupation({b, i}) != 1) return false;
  }
  return true;
}

}  // namespace ghzsim
