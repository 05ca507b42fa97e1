#include "ghzsim/optics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

namespace ghzsim {

namespace {

constexpr double kUnitarityTolerance = 1e-10;

bool has_duplicates(std::vector<ModeId> modes) {
  std::sort(modes.begin(), modes.end());
  return std::adjacent_find(modes.begin(), modes.end()) != modes.end();
}

std::ptrdiff_t index_of(const std::vector<ModeId>& modes, ModeId m) {
  auto it = std::find(modes.begin(), modes.end(), m);
  return it == modes.end() ? -1 : it - modes.begin();
}

double factorial(unsigned n) {
  static const auto table = [] {
    std::array<double, 171> t{};
    t[0] = 1.0;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<double>(i);
    return t;
  }();
  if (n >= table.size()) throw std::overflow_error("photon number too large for factorial table");
  return table[n];
}

using Occupations = std::vector<unsigned>;
using Expansion = std::vector<std::pair<Occupations, Amplitude>>;

// Expands prod_i (sum_j U_ji b_j^dagger)^{n_i} / sqrt(n_i!) |0> in the output Fock basis.
Expansion expand_input_occupation(const ModeUnitary& u, const Occupations& input) {
  std::map<Occupations, Amplitude> poly{{Occupations(u.rows(), 0u), Amplitude{1.0}}};
  for (std::size_t col = 0; col < u.cols(); ++col) {
    for (unsigned photon = 0; photon < input[col]; ++photon) {
      std::map<Occupations, Amplitude> next;
      for (const auto& [occ, coeff] : poly) {
        for (std::size_t row = 0; row < u.rows(); ++row) {
          Amplitude x = u.at(row, col);
          if (x == Amplitude{}) continue;
          Occupations bumped = occ;
          ++bumped[row];
          next[std::move(bumped)] += coeff * x;
        }
      }
      poly = std::move(next);
    }
  }
  double in_norm = 1.0;
  for (unsigned n : input) in_norm *= factorial(n);
  Expansion out;
  out.reserve(poly.size());
  for (auto& [occ, coeff] : poly) {
    double out_norm = 1.0;
    for (unsigned m : occ) out_norm *= factorial(m);
    out.emplace_back(occ, coeff * std::sqrt(out_norm / in_norm));
  }
  return out;
}

struct SplitTerm {
  Occupations input;                               // counts on u.inputs()
  std::vector<FockBasisState::Entry> passthrough;  // everything else
};

SplitTerm split_term(const FockBasisState& s, const ModeUnitary& u) {
  SplitTerm t{Occupations(u.cols(), 0u), {}};
  for (const auto& e : s.entries()) {
    auto idx = index_of(u.inputs(), e.first);
    if (idx >= 0) {
      t.input[static_cast<std::size_t>(idx)] = e.second;
    } else if (index_of(u.outputs(), e.first) >= 0) {
      throw std::invalid_argument("apply_mode_unitary: output mode " + e.first.label() +
                                  " is already occupied");
    } else {
      t.passthrough.push_back(e);
    }
  }
  return t;
}

void accumulate(Ket::Terms& out, const SplitTerm& t, Amplitude amp, const ModeUnitary& u,
                const Expansion& expansion) {
  for (const auto& [occ, coeff] : expansion) {
    std::map<ModeId, int> merged;
    for (const auto& e : t.passthrough) merged[e.first] = static_cast<int>(e.second);
    for (std::size_t row = 0; row < occ.size(); ++row) {
      if (occ[row]) merged[u.outputs()[row]] += static_cast<int>(occ[row]);
    }
    out[FockBasisState(merged)] += amp * coeff;
  }
}

}  // namespace

ModeUnitary::ModeUnitary(std::vector<ModeId> modes, std::vector<Amplitude> matrix)
    : ModeUnitary(modes, modes, std::move(matrix), false) {}

ModeUnitary::ModeUnitary(std::vector<ModeId> inputs, std::vector<ModeId> outputs,
                         std::vector<Amplitude> matrix, bool isometry)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), matrix_(std::move(matrix)), isometry_(isometry) {
  if (has_duplicates(inputs_) || has_duplicates(outputs_)) {
    throw std::invalid_argument("ModeUnitary: duplicate mode");
  }
  if (matrix_.size() != rows() * cols()) {
    throw std::invalid_argument("ModeUnitary: matrix size does not match mode lists");
  }
  if (isometry_ ? rows() < cols() : rows() != cols()) {
    throw std::invalid_argument("ModeUnitary: shape mismatch");
  }
  if (unitarity_defect() > kUnitarityTolerance) {
    throw std::invalid_argument("ModeUnitary: columns are not orthonormal");
  }
}

ModeUnitary ModeUnitary::identity(std::vector<ModeId> modes) {
  std::vector<Amplitude> m(modes.size() * modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) m[i * modes.size() + i] = 1.0;
  return ModeUnitary(std::move(modes), std::move(m));
}

Amplitude ModeUnitary::entry(ModeId out, ModeId in) const {
  auto r = index_of(outputs_, out);
  auto c = index_of(inputs_, in);
  if (r < 0 || c < 0) return {};
  return at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
}

double ModeUnitary::unitarity_defect() const {
  double worst = 0.0;
  for (std::size_t a = 0; a < cols(); ++a) {
    for (std::size_t b = 0; b < cols(); ++b) {
      Amplitude dot{};
      for (std::size_t r = 0; r < rows(); ++r) dot += std::conj(at(r, a)) * at(r, b);
      worst = std::max(worst, std::abs(dot - Amplitude(a == b ? 1.0 : 0.0)));
    }
  }
  return worst;
}

ModeUnitary hwp45(ModeId h, ModeId v) {
  if (h == v) throw std::invalid_argument("hwp45: h and v must differ");
  const double s = std::numbers::sqrt2 / 2.0;
  return ModeUnitary({h, v}, {s, s, s, -s});
}

ModeUnitary pbs(ModeId h1, ModeId v1, ModeId h2, ModeId v2) {
  // columns: h1 v1 h2 v2 ; rows: same order
  return ModeUnitary({h1, v1, h2, v2}, {
                                           1, 0, 0, 0,  //
                                           0, 0, 0, 1,  //
                                           0, 0, 1, 0,  //
                                           0, 1, 0, 0,  //
                                       });
}

ModeUnitary phase_plate(ModeId m, double phi) { return ModeUnitary({m}, {std::polar(1.0, phi)}); }

ModeUnitary relabel(std::vector<ModeId> from, std::vector<ModeId> to) {
  if (from.size() != to.size()) throw std::invalid_argument("relabel: size mismatch");
  std::vector<Amplitude> m(from.size() * from.size());
  for (std::size_t i = 0; i < from.size(); ++i) m[i * from.size() + i] = 1.0;
  return ModeUnitary(std::move(from), std::move(to), std::move(m));
}

ModeUnitary loss_channel(ModeId m, ModeId loss, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("loss_channel: eta outside [0,1]");
  return ModeUnitary({m}, {m, loss}, {std::sqrt(eta), std::sqrt(1.0 - eta)}, true);
}

ModeUnitary compose(const ModeUnitary& first, const ModeUnitary& second) {
  using Column = std::map<ModeId, Amplitude>;
  auto image_in_second = [&](ModeId m) {
    Column col;
    auto c = index_of(second.inputs(), m);
    if (c < 0) {
      col[m] = 1.0;
      return col;
    }
    for (std::size_t r = 0; r < second.rows(); ++r) {
      col[second.outputs()[r]] += second.at(r, static_cast<std::size_t>(c));
    }
    return col;
  };

  std::vector<ModeId> inputs = first.inputs();
  for (ModeId m : second.inputs()) {
    if (index_of(inputs, m) < 0) inputs.push_back(m);
  }

  std::vector<Column> columns;
  std::set<ModeId> touched;
  for (ModeId m : inputs) {
    Column col;
    auto c = index_of(first.inputs(), m);
    if (c < 0) {
      col = image_in_second(m);
    } else {
      for (std::size_t r = 0; r < first.rows(); ++r) {
        Amplitude x = first.at(r, static_cast<std::size_t>(c));
        for (const auto& [out, y] : image_in_second(first.outputs()[r])) col[out] += x * y;
      }
    }
    for (const auto& kv : col) touched.insert(kv.first);
    columns.push_back(std::move(col));
  }

  std::set<ModeId> input_set(inputs.begin(), inputs.end());
  std::vector<ModeId> outputs = touched == input_set ? inputs : std::vector<ModeId>(touched.begin(), touched.end());

  std::vector<Amplitude> matrix(outputs.size() * inputs.size());
  for (std::size_t c = 0; c < inputs.size(); ++c) {
    for (const auto& [out, x] : columns[c]) {
      matrix[static_cast<std::size_t>(index_of(outputs, out)) * inputs.size() + c] = x;
    }
  }
  bool rectangular = outputs.size() != inputs.size();
  return ModeUnitary(std::move(inputs), std::move(outputs), std::move(matrix),
                     rectangular || first.is_isometry() || second.is_isometry());
}

Ket apply_mode_unitary_serial(const Ket& ket, const ModeUnitary& u) {
  Ket::Terms out;
  for (const auto& [s, amp] : ket.terms()) {
    SplitTerm t = split_term(s, u);
    accumulate(out, t, amp, u, expand_input_occupation(u, t.input));
  }
  return Ket(std::move(out), ket.prune_tolerance());
}

Ket apply_mode_unitary(const Ket& ket, const ModeUnitary& u) {
  std::vector<SplitTerm> split;
  std::vector<Amplitude> amps;
  split.reserve(ket.size());
  amps.reserve(ket.size());
  std::map<Occupations, std::size_t> slot;
  std::vector<std::size_t> slot_of_term;
  for (const auto& [s, amp] : ket.terms()) {
    split.push_back(split_term(s, u));
    amps.push_back(amp);
    auto [it, _] = slot.try_emplace(split.back().input, slot.size());
    slot_of_term.push_back(it->second);
  }

  std::vector<const Occupations*> keys(slot.size());
  for (const auto& [occ, i] : slot) keys[i] = &occ;
  std::vector<Expansion> expansions(keys.size());

  const auto count = static_cast<std::ptrdiff_t>(keys.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    expansions[static_cast<std::size_t>(i)] = expand_input_occupation(u, *keys[static_cast<std::size_t>(i)]);
  }

  Ket::Terms out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    accumulate(out, split[i], amps[i], u, expansions[slot_of_term[i]]);
  }
  return Ket(std::move(out), ket.prune_tolerance());
}

void DetectorModel::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
    throw std::invalid_argument("detector efficiency must lie in [0, 1]");
  }
  if (!(dark_rate >= 0.0 && dark_rate < 1.0)) {
    throw std::invalid_argument("dark rate must lie in [0, 1)");
  }
}

ClickPattern::ClickPattern(std::vector<Entry> clicks) : clicks_(std::move(clicks)) {
  std::erase_if(clicks_, [](const Entry& e) { return e.second == 0; });
  std::sort(clicks_.begin(), clicks_.end());
  for (std::size_t i = 1; i < clicks_.size(); ++i) {
    if (clicks_[i].first == clicks_[i - 1].first) throw std::invalid_argument("ClickPattern: duplicate detector");
  }
}

unsigned ClickPattern::count(ModeId m) const {
  for (const auto& e : clicks_) {
    if (e.first == m) return e.second;
  }
  return 0;
}

std::string ClickPattern::label() const {
  std::string s;
  for (const auto& [mode, n] : clicks_) {
    if (!s.empty()) s += ' ';
    s += mode.label();
    if (n > 1) s += ':' + std::to_string(n);
  }
  return s;
}

namespace {

double binomial(unsigned n, unsigned k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// Calls fn(k) for every vector 0 <= k <= limit componentwise.
template <typename Fn>
void for_each_below(const Occupations& limit, Fn&& fn) {
  Occupations k(limit.size(), 0u);
  while (true) {
    fn(k);
    std::size_t i = 0;
    for (; i < k.size(); ++i) {
      if (k[i] < limit[i]) {
        ++k[i];
        break;
      }
      k[i] = 0;
    }
    if (i == k.size()) return;
  }
}

}  // namespace

std::vector<OutcomeBranch> measure_modes(const Ket& ket, const std::vector<ModeId>& detector_modes,
                                         const DetectorModel& model) {
  model.validate();
  if (has_duplicates(detector_modes)) throw std::invalid_argument("measure_modes: duplicate detector");
  const double total = norm_sq(ket);
  if (!(total > 0.0)) throw ZeroNormError("measure_modes: zero ket");

  std::vector<ModeId> detectors = detector_modes;
  std::sort(detectors.begin(), detectors.end());
  const std::size_t nd = detectors.size();

  // Resolving, lossless record: detector occupations -> conditioned ket.
  std::map<Occupations, Ket::Terms> groups;
  for (const auto& [s, amp] : ket.terms()) {
    Occupations occ(nd, 0u);
    std::map<ModeId, int> rest;
    for (const auto& e : s.entries()) {
      auto it = std::lower_bound(detectors.begin(), detectors.end(), e.first);
      if (it != detectors.end() && *it == e.first) {
        occ[static_cast<std::size_t>(it - detectors.begin())] = e.second;
      } else {
        rest[e.first] = static_cast<int>(e.second);
      }
    }
    groups[occ][FockBasisState(rest)] += amp;
  }

  // Thinning by efficiency: each lost-photon vector is a separate incoherent record.
  std::vector<std::pair<Occupations, Ket>> records;
  const double eta = model.efficiency;
  for (auto& [occ, terms] : groups) {
    Ket conditioned(std::move(terms), ket.prune_tolerance());
    if (conditioned.is_zero()) continue;
    if (eta == 1.0) {
      records.emplace_back(occ, std::move(conditioned));
      continue;
    }
    for_each_below(occ, [&](const Occupations& lost) {
      double factor = 1.0;
      Occupations seen(nd);
      for (std::size_t i = 0; i < nd; ++i) {
        seen[i] = occ[i] - lost[i];
        factor *= binomial(occ[i], lost[i]) * std::pow(eta, seen[i]) * std::pow(1.0 - eta, lost[i]);
      }
      if (factor > 0.0) records.emplace_back(std::move(seen), conditioned.scaled(std::sqrt(factor)));
    });
  }

  std::map<ClickPattern, OutcomeBranch> branches;
  auto emit = [&](const Occupations& seen, Ket component) {
    std::vector<ClickPattern::Entry> clicks;
    for (std::size_t i = 0; i < nd; ++i) {
      if (seen[i]) clicks.emplace_back(detectors[i], model.resolving ? seen[i] : 1u);
    }
    ClickPattern pattern(std::move(clicks));
    auto& b = branches[pattern];
    b.pattern = pattern;
    b.weight += norm_sq(component);
    if (!component.is_zero()) b.components.push_back(std::move(component));
  };

  const double q = model.dark_rate;
  for (auto& [seen, component] : records) {
    if (q == 0.0) {
      emit(seen, std::move(component));
      continue;
    }
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < nd; ++i) {
      if (model.resolving || seen[i] == 0) eligible.push_back(i);
    }
    if (eligible.size() >= 8 * sizeof(unsigned long long)) {
      throw std::invalid_argument("measure_modes: too many detectors for exact dark-count enumeration");
    }
    const unsigned long long subsets = 1ull << eligible.size();
    for (unsigned long long mask = 0; mask < subsets; ++mask) {
      Occupations with_dark = seen;
      std::size_t fired = 0;
      for (std::size_t b = 0; b < eligible.size(); ++b) {
        if (mask >> b & 1ull) {
          ++with_dark[eligible[b]];
          ++fired;
        }
      }
      double factor = std::pow(q, static_cast<double>(fired)) *
                      std::pow(1.0 - q, static_cast<double>(eligible.size() - fired));
      emit(with_dark, component.scaled(std::sqrt(factor)));
    }
  }

  std::vector<OutcomeBranch> out;
  out.reserve(branches.size());
  for (auto& [pattern, b] : branches) {
    if (b.weight <= 0.0) continue;
    b.probability = b.weight / total;
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace ghzsim
