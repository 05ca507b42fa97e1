#include "ghzsim/fock.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

namespace ghzsim {

namespace {

struct KindName {
  ModeKind kind;
  std::string_view prefix;
};

// Longest prefixes first so "loss" is not read as "l".
constexpr std::array<KindName, 7> kKindNames{{
    {ModeKind::Loss, "loss"},
    {ModeKind::DetectorH, "Dh"},
    {ModeKind::DetectorV, "Dv"},
    {ModeKind::EnsembleR, "r"},
    {ModeKind::EnsembleL, "l"},
    {ModeKind::PhotonH, "h"},
    {ModeKind::PhotonV, "v"},
}};

void check_finite(Amplitude a) {
  if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
    throw std::domain_error("non-finite amplitude");
  }
}

}  // namespace

std::string ModeId::label() const {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return std::string(kn.prefix) + std::to_string(channel);
  }
  return "?" + std::to_string(channel);
}

ModeId ModeId::parse(std::string_view label) {
  for (const auto& kn : kKindNames) {
    if (!label.starts_with(kn.prefix)) continue;
    auto digits = label.substr(kn.prefix.size());
    int channel = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), channel);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || channel < 1) {
      break;
    }
    return {kn.kind, channel};
  }
  throw std::invalid_argument("bad mode label: " + std::string(label));
}

FockBasisState::FockBasisState(const std::map<ModeId, int>& occupations) {
  for (const auto& [mode, count] : occupations) {
    if (count < 0) throw std::invalid_argument("negative occupation for " + mode.label());
    if (count > 0) entries_.emplace_back(mode, static_cast<unsigned>(count));
  }
}

unsigned FockBasisState::occupation(ModeId m) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), m,
                             [](const Entry& e, ModeId key) { return e.first < key; });
  return (it != entries_.end() && it->first == m) ? it->second : 0u;
}

unsigned FockBasisState::total() const {
  unsigned n = 0;
  for (const auto& e : entries_) n += e.second;
  return n;
}

FockBasisState FockBasisState::with(ModeId m, unsigned count) const {
  FockBasisState out;
  out.entries_.reserve(entries_.size() + 1);
  bool placed = false;
  for (const auto& e : entries_) {
    if (!placed && !(e.first < m)) {
      placed = true;
      if (count > 0) out.entries_.emplace_back(m, count);
      if (e.first == m) continue;
    }
    out.entries_.push_back(e);
  }
  if (!placed && count > 0) out.entries_.emplace_back(m, count);
  return out;
}

std::string FockBasisState::label() const {
  std::string s = "|";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(entries_[i].second) + "_" + entries_[i].first.label();
  }
  return s + ">";
}

Ket::Ket(Terms terms, double prune_tolerance) : terms_(std::move(terms)), prune_tolerance_(prune_tolerance) {
  std::erase_if(terms_, [&](const auto& kv) {
    check_finite(kv.second);
    return std::abs(kv.second) < prune_tolerance_;
  });
}

Amplitude Ket::amplitude(const FockBasisState& s) const {
  auto it = terms_.find(s);
  return it == terms_.end() ? Amplitude{} : it->second;
}

Ket Ket::scaled(Amplitude factor) const {
  Terms out;
  for (const auto& [s, a] : terms_) out.emplace_hint(out.end(), s, a * factor);
  return Ket(std::move(out), prune_tolerance_);
}

Ket basis_ket(const std::map<ModeId, int>& occupations) {
  return Ket({{FockBasisState(occupations), Amplitude{1.0}}});
}

Ket vacuum() { return basis_ket({}); }

Ket apply_creation(const Ket& ket, ModeId m) {
  Ket::Terms out;
  for (const auto& [s, a] : ket.terms()) {
    unsigned n = s.occupation(m);
    out[s.with(m, n + 1)] += a * std::sqrt(static_cast<double>(n + 1));
  }
  return Ket(std::move(out), ket.prune_tolerance());
}

Ket apply_annihilation(const Ket& ket, ModeId m) {
  Ket::Terms out;
  for (const auto& [s, a] : ket.terms()) {
    unsigned n = s.occupation(m);
    if (n == 0) continue;
    out[s.with(m, n - 1)] += a * std::sqrt(static_cast<double>(n));
  }
  return Ket(std::move(out), ket.prune_tolerance());
}

Amplitude inner_product(const Ket& a, const Ket& b) {
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  Amplitude acc{};
  for (const auto& [s, amp] : small.terms()) {
    auto it = large.terms().find(s);
    if (it == large.terms().end()) continue;
    acc += (&small == &a) ? std::conj(amp) * it->second : std::conj(it->second) * amp;
  }
  return acc;
}

double norm_sq(const Ket& ket) {
  double acc = 0.0;
  for (const auto& kv : ket.terms()) acc += std::norm(kv.second);
  return acc;
}

Ket normalize(const Ket& ket) {
  double n2 = norm_sq(ket);
  if (!(n2 > 0.0)) throw ZeroNormError("cannot normalize the zero ket");
  return ket.scaled(1.0 / std::sqrt(n2));
}

Ket add(const Ket& a, const Ket& b) {
  Ket::Terms out = a.terms();
  for (const auto& [s, amp] : b.terms()) out[s] += amp;
  return Ket(std::move(out), std::min(a.prune_tolerance(), b.prune_tolerance()));
}

std::vector<ModeId> occupied_modes(const Ket& ket) {
  std::vector<ModeId> out;
  for (const auto& kv : ket.terms()) {
    for (const auto& e : kv.first.entries()) out.push_back(e.first);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Ket tensor(const Ket& a, const Ket& b) {
  auto ma = occupied_modes(a);
  auto mb = occupied_modes(b);
  std::vector<ModeId> common;
  std::set_intersection(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(common));
  if (!common.empty()) {
    throw std::invalid_argument("tensor: overlapping mode " + common.front().label());
  }
  Ket::Terms out;
  for (const auto& [sa, xa] : a.terms()) {
    for (const auto& [sb, xb] : b.terms()) {
      std::map<ModeId, int> occ;
      for (const auto& e : sa.entries()) occ[e.first] = static_cast<int>(e.second);
      for (const auto& e : sb.entries()) occ[e.first] = static_cast<int>(e.second);
      out[FockBasisState(occ)] += xa * xb;
    }
  }
  return Ket(std::move(out), std::min(a.prune_tolerance(), b.prune_tolerance()));
}

Ket project_sector(const Ket& ket, const SectorPredicate& keep) {
  Ket::Terms out;
  for (const auto& [s, a] : ket.terms()) {
    if (keep(s)) out.emplace_hint(out.end(), s, a);
  }
  return Ket(std::move(out), ket.prune_tolerance());
}

nlohmann::ordered_json to_json(const Ket& ket) {
  auto terms = nlohmann::ordered_json::array();
  for (const auto& [s, a] : ket.terms()) {
    auto occupations = nlohmann::ordered_json::object();
    for (const auto& e : s.entries()) occupations[e.first.label()] = e.second;
    nlohmann::ordered_json entry;
    entry["occupations"] = std::move(occupations);
    entry["re"] = a.real();
    entry["im"] = a.imag();
    terms.push_back(std::move(entry));
  }
  return terms;
}

Ket ket_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw std::invalid_argument("ket JSON must be an array of terms");
  Ket::Terms terms;
  for (const auto& entry : doc) {
    std::map<ModeId, int> occ;
    for (const auto& [label, count] : entry.at("occupations").items()) {
      occ[ModeId::parse(label)] = count.get<int>();
    }
    terms[FockBasisState(occ)] += Amplitude{entry.at("re").get<double>(), entry.at("im").get<double>()};
  }
  return Ket(std::move(terms));
}

}  // namespace ghzsim
