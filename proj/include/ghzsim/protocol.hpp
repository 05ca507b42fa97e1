#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghzsim/analyzer.hpp"
#include "ghzsim/optics.hpp"
#include "ghzsim/source.hpp"

namespace ghzsim {

enum class Direction { EnsembleGhz, PhotonGhz };
enum class Engine { Exact, MonteCarlo };

std::string to_string(Direction d);
std::string to_string(Engine e);
Direction direction_from_string(const std::string& s);
Engine engine_from_string(const std::string& s);

struct ProtocolConfig {
  int n = 3;
  SourceParams source;
  DetectorModel detector;
  double f_p = 1e7;  // pump repetition rate, Hz
  Direction direction = Direction::EnsembleGhz;
  Engine engine = Engine::Exact;
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// JSON keys mirror the CLI flags: n, p, jmax, eta, dark, resolving, fp, trials, seed,
/// engine, direction. Missing keys keep the values already in `base`.
ProtocolConfig config_from_json(const nlohmann::json& doc, ProtocolConfig base = {});
nlohmann::ordered_json to_json(const ProtocolConfig& config);

struct PatternRow {
  ClickPattern pattern;
  PatternClass cls = PatternClass::Other;
  double probability = 0.0;    // normalized
  double weight = 0.0;         // against the unnormalized source state
  double signal_weight = 0.0;  // weight left after one-excitation-per-party post-selection
  std::optional<double> fidelity_raw;
  std::optional<double> fidelity_postselected;
};

struct ClassSummary {
  double probability = 0.0;
  double weight = 0.0;
  double signal_weight = 0.0;
  std::optional<double> fidelity_raw;
  std::optional<double> fidelity_postselected;
};

struct MonteCarloSummary {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::array<std::uint64_t, 3> counts{};
  std::array<double, 3> frequency{};
  std::array<double, 3> standard_error{};
  /// MPlus + MMinus frequency, and the same figure rescaled by the source norm.
  double coincidence_frequency = 0.0;
  double coincidence_standard_error = 0.0;
  double coincidence_weight = 0.0;
  double coincidence_weight_standard_error = 0.0;
  std::map<ClickPattern, std::uint64_t> pattern_counts;
};

struct ProtocolReport {
  ProtocolConfig config;
  double input_norm_sq = 0.0;
  std::array<ClassSummary, 3> classes{};  // indexed by PatternClass
  std::vector<PatternRow> patterns;
  double p_signal = 0.0;       // GHZ-signal weight of MPlus + MMinus
  double p_coincidence = 0.0;  // raw MPlus + MMinus weight, contamination included
  double p_signal_normalized = 0.0;
  double p_coincidence_normalized = 0.0;
  double p_closed_form = 0.0;  // p^n / 2^(n-1)
  double rate = 0.0;           // f_p * p_signal, events per second
  double rate_coincidence = 0.0;
  std::optional<MonteCarloSummary> montecarlo;
  std::vector<std::string> notes;

  const ClassSummary& of(PatternClass c) const { return classes[static_cast<std::size_t>(c)]; }
};

/// |<target|rho|target>| for the branch's mixed conditioned state. Throws ZeroNormError
/// for an empty branch.
double fidelity(const OutcomeBranch& branch, const Ket& target);

/// Same, after restricting every component to the sector accepted by `keep`. Throws
/// ZeroNormError when nothing survives the post-selection.
double postselected_fidelity(const OutcomeBranch& branch, const Ket& target, const SectorPredicate& keep);

/// The ideal conditioned state heralded by class `c` for the configured direction.
Ket target_state(const ProtocolConfig& config, PatternClass c);
SectorPredicate party_predicate(const ProtocolConfig& config);

/// Outcome branches of the configured direction for a given source state.
std::vector<OutcomeBranch> protocol_branches(const ProtocolConfig& config, const Ket& source);

ProtocolReport run_exact(const ProtocolConfig& config);
ProtocolReport run_montecarlo(const ProtocolConfig& config);
ProtocolReport run(const ProtocolConfig& config);

/// Draws shots [0, trials) from the ideal resolving distribution `ideal` (probabilities
/// summing to 1), applies the configured detector model per shot, and counts patterns.
/// OpenMP-parallel; counts are identical to the serial reference for any thread count.
std::map<ClickPattern, std::uint64_t> sample_patterns(const ProtocolConfig& config,
                                                      const std::vector<OutcomeBranch>& ideal);
std::map<ClickPattern, std::uint64_t> sample_patterns_serial(const ProtocolConfig& config,
                                                             const std::vector<OutcomeBranch>& ideal);

enum class SweepParameter { P, N, Eta };
SweepParameter sweep_parameter_from_string(const std::string& s);
std::string to_string(SweepParameter s);

struct SweepRow {
  double value = 0.0;
  std::optional<ProtocolReport> report;
  std::string error;
};

std::vector<SweepRow> sweep(const ProtocolConfig& config, SweepParameter parameter,
                            const std::vector<double>& values);

nlohmann::ordered_json to_json(const ProtocolReport& report);
/// Header: pattern,class,probability,fidelity_raw,fidelity_postselected,weight,signal_weight
std::string to_csv(const ProtocolReport& report);
nlohmann::ordered_json to_json(const std::vector<SweepRow>& rows, SweepParameter parameter);
std::string to_csv(const std::vector<SweepRow>& rows, SweepParameter parameter);

/// "%.17g" formatting shared by the CSV writers.
std::string format_double(double x);

}  // namespace ghzsim
