#include "ghzsim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ghzsim/rng.hpp"

namespace ghzsim {

namespace {

constexpr std::array<PatternClass, 3> kClasses{PatternClass::MPlus, PatternClass::MMinus, PatternClass::Other};

std::size_t idx(PatternClass c) { return static_cast<std::size_t>(c); }

bool heralding(PatternClass c) { return c == PatternClass::MPlus || c == PatternClass::MMinus; }

// Sum |<t|c>|^2 and sum ||c||^2 over components, optionally post-selected.
std::pair<double, double> overlap_and_weight(const OutcomeBranch& b, const Ket& target, const SectorPredicate* keep) {
  double overlap = 0.0, weight = 0.0;
  for (const auto& c : b.components) {
    const Ket kept = keep ? project_sector(c, *keep) : c;
    overlap += std::norm(inner_product(target, kept));
    weight += norm_sq(kept);
  }
  return {overlap, weight};
}

std::optional<double> ratio(double num, double den) {
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

nlohmann::ordered_json optional_json(const std::optional<double>& x) {
  return x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json(nullptr);
}

std::string optional_csv(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_string(Direction d) { return d == Direction::EnsembleGhz ? "ensemble-ghz" : "photon-ghz"; }
std::string to_string(Engine e) { return e == Engine::Exact ? "exact" : "montecarlo"; }

Direction direction_from_string(const std::string& s) {
  if (s == "ensemble-ghz") return Direction::EnsembleGhz;
  if (s == "photon-ghz") return Direction::PhotonGhz;
  throw std::invalid_argument("unknown direction '" + s + "'");
}

Engine engine_from_string(const std::string& s) {
  if (s == "exact") return Engine::Exact;
  if (s == "montecarlo") return Engine::MonteCarlo;
  throw std::invalid_argument("unknown engine '" + s + "'");
}

void ProtocolConfig::validate() const {
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  source.validate();
  detector.validate();
  if (!(f_p > 0.0) || !std::isfinite(f_p)) throw std::invalid_argument("f_p must be positive");
  if (engine == Engine::MonteCarlo && trials < 1) throw std::invalid_argument("trials must be >= 1");
}

ProtocolConfig config_from_json(const nlohmann::json& doc, ProtocolConfig base) {
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::vector<std::string> known{"n",      "p",     "jmax",   "eta",    "dark",     "resolving",
                                              "fp",     "trials", "seed",  "engine", "direction"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  try {
    if (doc.contains("n")) base.n = doc["n"].get<int>();
    if (doc.contains("p")) base.source.p = doc["p"].get<double>();
    if (doc.contains("jmax")) base.source.j_max = doc["jmax"].get<int>();
    if (doc.contains("eta")) base.detector.efficiency = doc["eta"].get<double>();
    if (doc.contains("dark")) base.detector.dark_rate = doc["dark"].get<double>();
    if (doc.contains("resolving")) base.detector.resolving = doc["resolving"].get<bool>();
    if (doc.contains("fp")) base.f_p = doc["fp"].get<double>();
    if (doc.contains("trials")) base.trials = doc["trials"].get<std::uint64_t>();
    if (doc.contains("seed")) base.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("engine")) base.engine = engine_from_string(doc["engine"].get<std::string>());
    if (doc.contains("direction")) base.direction = direction_from_string(doc["direction"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config type error: ") + e.what());
  }
  return base;
}

nlohmann::ordered_json to_json(const ProtocolConfig& c) {
  nlohmann::ordered_json j;
  j["n"] = c.n;
  j["p"] = c.source.p;
  j["jmax"] = c.source.j_max;
  j["eta"] = c.detector.efficiency;
  j["dark"] = c.detector.dark_rate;
  j["resolving"] = c.detector.resolving;
  j["fp"] = c.f_p;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["engine"] = to_string(c.engine);
  j["direction"] = to_string(c.direction);
  return j;
}

double fidelity(const OutcomeBranch& branch, const Ket& target) {
  auto [overlap, weight] = overlap_and_weight(branch, target, nullptr);
  if (!(weight > 0.0)) throw ZeroNormError("fidelity: empty conditioned state");
  return overlap / weight;
}

double postselected_fidelity(const OutcomeBranch& branch, const Ket& target, const SectorPredicate& keep) {
  auto [overlap, weight] = overlap_and_weight(branch, target, &keep);
  if (!(weight > 0.0)) throw ZeroNormError("fidelity: nothing survives post-selection");
  return overlap / weight;
}

Ket target_state(const ProtocolConfig& config, PatternClass c) {
  if (!heralding(c)) throw std::invalid_argument("no target state for class Other");
  const int sign = c == PatternClass::MPlus ? +1 : -1;
  return config.direction == Direction::EnsembleGhz ? ensemble_ghz(config.n, sign) : photon_ghz(config.n, sign);
}

SectorPredicate party_predicate(const ProtocolConfig& config) {
  const int n = config.n;
  if (config.direction == Direction::EnsembleGhz) {
    return [n](const FockBasisState& s) { return one_per_party(s, n, ModeKind::EnsembleR, ModeKind::EnsembleL); };
  }
  return [n](const FockBasisState& s) { return one_per_party(s, n, ModeKind::PhotonH, ModeKind::PhotonV); };
}

std::vector<OutcomeBranch> protocol_branches(const ProtocolConfig& config, const Ket& source) {
  return config.direction == Direction::EnsembleGhz ? enumerate_outcomes(source, config.n, config.detector)
                                                    : project_N_basis(source, config.n, config.detector);
}

namespace {

void add_notes(ProtocolReport& r) {
  const auto& c = r.config;
  if (c.n == 3 && std::abs(c.source.p - 0.01) < 1e-15) {
    r.notes.push_back(
        "p^n/2^(n-1) at n=3, p=0.01 is 2.5e-7 (2.5 events/s at f_p=1e7 Hz); the rounded figures 1e-6 and "
        "10 events/s often quoted for this setting agree only in order of magnitude");
  }
  if (c.source.j_max < 1) {
    r.notes.push_back("j_max=0 keeps only the vacuum, so no coincidences can occur");
  }
}

ProtocolReport summarize(const ProtocolConfig& config, double norm, const std::vector<OutcomeBranch>& branches) {
  ProtocolReport r;
  r.config = config;
  r.input_norm_sq = norm;
  const auto keep = party_predicate(config);
  std::array<Ket, 3> targets;
  for (PatternClass c : {PatternClass::MPlus, PatternClass::MMinus}) targets[idx(c)] = target_state(config, c);

  std::array<double, 3> raw_overlap{}, post_overlap{};
  for (const auto& b : branches) {
    PatternRow row{b.pattern, b.cls, b.probability, b.weight, 0.0, std::nullopt, std::nullopt};
    auto& cls = r.classes[idx(b.cls)];
    cls.probability += b.probability;
    cls.weight += b.weight;
    if (heralding(b.cls)) {
      const Ket& t = targets[idx(b.cls)];
      auto [raw, w] = overlap_and_weight(b, t, nullptr);
      auto [post, sw] = overlap_and_weight(b, t, &keep);
      row.signal_weight = sw;
      row.fidelity_raw = ratio(raw, w);
      row.fidelity_postselected = ratio(post, sw);
      cls.signal_weight += sw;
      raw_overlap[idx(b.cls)] += raw;
      post_overlap[idx(b.cls)] += post;
    }
    r.patterns.push_back(std::move(row));
  }
  for (PatternClass c : {PatternClass::MPlus, PatternClass::MMinus}) {
    auto& cls = r.classes[idx(c)];
    cls.fidelity_raw = ratio(raw_overlap[idx(c)], cls.weight);
    cls.fidelity_postselected = ratio(post_overlap[idx(c)], cls.signal_weight);
  }

  const auto& plus = r.of(PatternClass::MPlus);
  const auto& minus = r.of(PatternClass::MMinus);
  r.p_signal = plus.signal_weight + minus.signal_weight;
  r.p_coincidence = plus.weight + minus.weight;
  r.p_signal_normalized = r.p_signal / norm;
  r.p_coincidence_normalized = plus.probability + minus.probability;
  r.p_closed_form = std::pow(config.source.p, config.n) / std::pow(2.0, config.n - 1);
  r.rate = config.f_p * r.p_signal;
  r.rate_coincidence = config.f_p * r.p_coincidence;
  add_notes(r);
  return r;
}

// Shot outcome for one trial, given the sampled ideal resolving pattern.
ClickPattern detect_shot(const ProtocolConfig& config, const std::vector<ModeId>& detectors,
                         const ClickPattern& ideal, CounterRng& rng) {
  const auto& model = config.detector;
  std::vector<ClickPattern::Entry> clicks;
  for (ModeId d : detectors) {
    unsigned arriving = ideal.count(d);
    unsigned seen = 0;
    if (model.efficiency == 1.0) {
      seen = arriving;
    } else {
      for (unsigned k = 0; k < arriving; ++k) seen += rng.bernoulli(model.efficiency) ? 1u : 0u;
    }
    if (model.dark_rate > 0.0 && rng.bernoulli(model.dark_rate)) {
      seen += (model.resolving || seen == 0) ? 1u : 0u;
    }
    if (seen) clicks.emplace_back(d, model.resolving ? seen : 1u);
  }
  return ClickPattern(std::move(clicks));
}

std::vector<double> cumulative(const std::vector<OutcomeBranch>& ideal) {
  std::vector<double> cum;
  cum.reserve(ideal.size());
  double acc = 0.0;
  for (const auto& b : ideal) cum.push_back(acc += b.probability);
  return cum;
}

std::size_t pick(const std::vector<double>& cum, double u) {
  auto it = std::upper_bound(cum.begin(), cum.end(), u * cum.back());
  return std::min(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
}

}  // namespace

ProtocolReport run_exact(const ProtocolConfig& config) {
  config.validate();
  if (config.engine != Engine::Exact) throw std::invalid_argument("run_exact needs engine=exact");
  const Ket source = system_state(config.n, config.source);
  return summarize(config, norm_sq(source), protocol_branches(config, source));
}

std::map<ClickPattern, std::uint64_t> sample_patterns_serial(const ProtocolConfig& config,
                                                             const std::vector<OutcomeBranch>& ideal) {
  const auto detectors = detector_modes(config.n);
  const auto cum = cumulative(ideal);
  std::map<ClickPattern, std::uint64_t> counts;
  for (std::uint64_t t = 0; t < config.trials; ++t) {
    CounterRng rng(config.seed, t);
    const auto& b = ideal[pick(cum, rng.uniform())];
    ++counts[detect_shot(config, detectors, b.pattern, rng)];
  }
  return counts;
}

std::map<ClickPattern, std::uint64_t> sample_patterns(const ProtocolConfig& config,
                                                      const std::vector<OutcomeBranch>& ideal) {
  const auto detectors = detector_modes(config.n);
  const auto cum = cumulative(ideal);
  const auto trials = static_cast<std::int64_t>(config.trials);
  std::map<ClickPattern, std::uint64_t> counts;
#pragma omp parallel
  {
    std::map<ClickPattern, std::uint64_t> local;
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < trials; ++t) {
      CounterRng rng(config.seed, static_cast<std::uint64_t>(t));
      const auto& b = ideal[pick(cum, rng.uniform())];
      ++local[detect_shot(config, detectors, b.pattern, rng)];
    }
#pragma omp critical
    for (const auto& [pattern, k] : local) counts[pattern] += k;
  }
  return counts;
}

ProtocolReport run_montecarlo(const ProtocolConfig& config) {
  config.validate();
  if (config.engine != Engine::MonteCarlo) throw std::invalid_argument("run_montecarlo needs engine=montecarlo");
  if (config.trials == 0) throw std::invalid_argument("trials must be >= 1");

  const Ket source = system_state(config.n, config.source);
  const double norm = norm_sq(source);

  ProtocolConfig ideal_config = config;
  ideal_config.detector = DetectorModel{true, 1.0, 0.0};
  const auto ideal = protocol_branches(ideal_config, source);

  ProtocolReport r = summarize(config, norm, protocol_branches(config, source));

  MonteCarloSummary mc;
  mc.trials = config.trials;
  mc.seed = config.seed;
  mc.pattern_counts = sample_patterns(config, ideal);
  for (const auto& [pattern, k] : mc.pattern_counts) mc.counts[idx(classify_pattern(pattern, config.n))] += k;

  const double trials = static_cast<double>(config.trials);
  for (PatternClass c : kClasses) {
    double f = static_cast<double>(mc.counts[idx(c)]) / trials;
    mc.frequency[idx(c)] = f;
    mc.standard_error[idx(c)] = std::sqrt(f * (1.0 - f) / trials);
  }
  double f = mc.frequency[idx(PatternClass::MPlus)] + mc.frequency[idx(PatternClass::MMinus)];
  mc.coincidence_frequency = f;
  mc.coincidence_standard_error = std::sqrt(f * (1.0 - f) / trials);
  mc.coincidence_weight = f * norm;
  mc.coincidence_weight_standard_error = mc.coincidence_standard_error * norm;
  r.montecarlo = std::move(mc);
  return r;
}

ProtocolReport run(const ProtocolConfig& config) {
  return config.engine == Engine::Exact ? run_exact(config) : run_montecarlo(config);
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
  if (s == "p") return SweepParameter::P;
  if (s == "n") return SweepParameter::N;
  if (s == "eta") return SweepParameter::Eta;
  throw std::invalid_argument("unknown sweep parameter '" + s + "'");
}

std::string to_string(SweepParameter s) {
  switch (s) {
    case SweepParameter::P: return "p";
    case SweepParameter::N: return "n";
    case SweepParameter::Eta: return "eta";
  }
  return "?";
}

std::vector<SweepRow> sweep(const ProtocolConfig& config, SweepParameter parameter, const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  std::vector<SweepRow> rows;
  for (double value : values) {
    SweepRow row;
    row.value = value;
    try {
      ProtocolConfig c = config;
      switch (parameter) {
        case SweepParameter::P: c.source.p = value; break;
        case SweepParameter::Eta: c.detector.efficiency = value; break;
        case SweepParameter::N:
          if (value != std::floor(value) || value > 64) throw std::invalid_argument("n must be an integer");
          c.n = static_cast<int>(value);
          break;
      }
      row.report = run(c);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json to_json(const ProtocolReport& r) {
  nlohmann::ordered_json j;
  j["config"] = to_json(r.config);
  j["input_norm_sq"] = r.input_norm_sq;
  j["p_signal"] = r.p_signal;
  j["p_coincidence"] = r.p_coincidence;
  j["p_signal_normalized"] = r.p_signal_normalized;
  j["p_coincidence_normalized"] = r.p_coincidence_normalized;
  j["p_closed_form"] = r.p_closed_form;
  j["rate"] = r.rate;
  j["rate_coincidence"] = r.rate_coincidence;

  nlohmann::ordered_json classes;
  for (PatternClass c : kClasses) {
    const auto& s = r.of(c);
    nlohmann::ordered_json cj;
    cj["probability"] = s.probability;
    cj["weight"] = s.weight;
    cj["signal_weight"] = s.signal_weight;
    cj["fidelity_raw"] = optional_json(s.fidelity_raw);
    cj["fidelity_postselected"] = optional_json(s.fidelity_postselected);
    classes[to_string(c)] = std::move(cj);
  }
  j["classes"] = std::move(classes);

  auto patterns = nlohmann::ordered_json::array();
  for (const auto& row : r.patterns) {
    nlohmann::ordered_json pj;
    pj["pattern"] = row.pattern.label();
    pj["class"] = to_string(row.cls);
    pj["probability"] = row.probability;
    pj["weight"] = row.weight;
    pj["signal_weight"] = row.signal_weight;
    pj["fidelity_raw"] = optional_json(row.fidelity_raw);
    pj["fidelity_postselected"] = optional_json(row.fidelity_postselected);
    patterns.push_back(std::move(pj));
  }
  j["patterns"] = std::move(patterns);

  if (r.montecarlo) {
    const auto& mc = *r.montecarlo;
    nlohmann::ordered_json mj;
    mj["trials"] = mc.trials;
    mj["seed"] = mc.seed;
    nlohmann::ordered_json freq;
    for (PatternClass c : kClasses) {
      freq[to_string(c)] = {{"count", mc.counts[idx(c)]},
                            {"frequency", mc.frequency[idx(c)]},
                            {"standard_error", mc.standard_error[idx(c)]},
                            {"exact_probability", r.of(c).probability}};
    }
    mj["classes"] = std::move(freq);
    mj["coincidence_frequency"] = mc.coincidence_frequency;
    mj["coincidence_standard_error"] = mc.coincidence_standard_error;
    mj["coincidence_weight"] = mc.coincidence_weight;
    mj["coincidence_weight_standard_error"] = mc.coincidence_weight_standard_error;
    auto pc = nlohmann::ordered_json::array();
    for (const auto& [pattern, k] : mc.pattern_counts) {
      pc.push_back({{"pattern", pattern.label()},
                    {"class", to_string(classify_pattern(pattern, r.config.n))},
                    {"count", k}});
    }
    mj["patterns"] = std::move(pc);
    j["montecarlo"] = std::move(mj);
  }
  j["notes"] = r.notes;
  return j;
}

std::string to_csv(const ProtocolReport& r) {
  std::ostringstream os;
  os << "pattern,class,probability,fidelity_raw,fidelity_postselected,weight,signal_weight\n";
  for (const auto& row : r.patterns) {
    os << row.pattern.label() << ',' << to_string(row.cls) << ',' << format_double(row.probability) << ','
       << optional_csv(row.fidelity_raw) << ',' << optional_csv(row.fidelity_postselected) << ','
       << format_double(row.weight) << ',' << format_double(row.signal_weight) << '\n';
  }
  return os.str();
}

nlohmann::ordered_json to_json(const std::vector<SweepRow>& rows, SweepParameter parameter) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json j;
    j["parameter"] = to_string(parameter);
    j["value"] = row.value;
    if (row.report) {
      j["report"] = to_json(*row.report);
    } else {
      j["error"] = row.error;
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::string to_csv(const std::vector<SweepRow>& rows, SweepParameter parameter) {
  std::ostringstream os;
  os << to_string(parameter)
     << ",p_signal,p_coincidence,p_closed_form,rate,fidelity_postselected_plus,fidelity_postselected_minus,error\n";
  for (const auto& row : rows) {
    os << format_double(row.value) << ',';
    if (row.report) {
      const auto& r = *row.report;
      os << format_double(r.p_signal) << ',' << format_double(r.p_coincidence) << ','
         << format_double(r.p_closed_form) << ',' << format_double(r.rate) << ','
         << optional_csv(r.of(PatternClass::MPlus).fidelity_postselected) << ','
         << optional_csv(r.of(PatternClass::MMinus).fidelity_postselected) << ",\n";
    } else {
      os << ",,,,,," << '"' << row.error << "\"\n";
    }
  }
  return os.str();
}

}  // namespace ghzsim
