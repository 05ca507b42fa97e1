#include "ghzsim/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ghzsim/analyzer.hpp"
#include "ghzsim/protocol.hpp"
#include "ghzsim/source.hpp"

namespace ghzsim {

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::optional<int> n;
  std::optional<double> p;
  std::optional<int> jmax;
  std::optional<double> eta;
  std::optional<double> dark;
  std::optional<bool> resolving;
  std::optional<double> fp;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> engine;
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  std::string dump_state;
  bool print_config = false;
  std::string sweep_param = "p";
  std::vector<double> sweep_values;
};

ProtocolConfig effective_config(const Flags& f) {
  ProtocolConfig c;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("cannot read config file " + f.config_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file is not valid JSON: " + f.config_path);
    }
    try {
      c = config_from_json(doc, c);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (f.n) c.n = *f.n;
  if (f.p) c.source.p = *f.p;
  if (f.jmax) c.source.j_max = *f.jmax;
  if (f.eta) c.detector.efficiency = *f.eta;
  if (f.dark) c.detector.dark_rate = *f.dark;
  if (f.resolving) c.detector.resolving = *f.resolving;
  if (f.fp) c.f_p = *f.fp;
  if (f.trials) c.trials = *f.trials;
  if (f.seed) c.seed = *f.seed;
  try {
    if (f.engine) c.engine = engine_from_string(*f.engine);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

void validate_or_throw(const ProtocolConfig& c) {
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

class Emitter {
 public:
  Emitter(const Flags& f, std::ostream& out) : flags_(f), out_(out) {}

  void emit(const std::string& json_text, const std::string& csv_text) const {
    const bool json = flags_.format != "csv";
    const bool csv = flags_.format != "json";
    if (flags_.out_path.empty()) {
      if (json) out_ << json_text << '\n';
      if (csv) out_ << csv_text;
      return;
    }
    if (json) write(flags_.out_path, json_text + "\n");
    if (csv) write(json ? flags_.out_path + ".csv" : flags_.out_path, csv_text);
  }

  static void write(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << text;
  }

 private:
  const Flags& flags_;
  std::ostream& out_;
};

void dump_state(const Flags& f, const Ket& ket) {
  if (!f.dump_state.empty()) Emitter::write(f.dump_state, to_json(ket).dump(2) + "\n");
}

std::string ket_csv(const Ket& ket) {
  std::ostringstream os;
  os << "state,re,im\n";
  for (const auto& [s, a] : ket.terms()) {
    os << '"' << s.label() << "\"," << format_double(a.real()) << ',' << format_double(a.imag()) << '\n';
  }
  return os.str();
}

void cmd_pair(const Flags& f, const ProtocolConfig& c, const Emitter& emit) {
  Ket ket = pair_state(c.source, 1);
  dump_state(f, ket);
  nlohmann::ordered_json j;
  j["p"] = c.source.p;
  j["jmax"] = c.source.j_max;
  j["channel"] = 1;
  j["norm_sq"] = norm_sq(ket);
  j["terms"] = to_json(ket);
  emit.emit(j.dump(2), ket_csv(ket));
}

void cmd_protocol(const Flags& f, const ProtocolConfig& c, const Emitter& emit) {
  dump_state(f, system_state(c.n, c.source));
  ProtocolReport report = run(c);
  emit.emit(to_json(report).dump(2), to_csv(report));
}

void cmd_bell(const ProtocolConfig& c, const Emitter& emit) {
  auto rows = bell_table(c.detector);
  auto arr = nlohmann::ordered_json::array();
  std::ostringstream csv;
  csv << "input,class,pattern,pattern_class,probability\n";
  for (const auto& row : rows) {
    nlohmann::ordered_json rj;
    rj["input"] = to_string(row.input);
    rj["class"] = to_string(row.cls);
    auto pats = nlohmann::ordered_json::array();
    for (const auto& b : row.branches) {
      nlohmann::ordered_json pj;
      pj["pattern"] = b.pattern.label();
      pj["pattern_class"] = to_string(b.cls);
      pj["probability"] = b.probability;
      pats.push_back(std::move(pj));
      csv << to_string(row.input) << ',' << to_string(row.cls) << ',' << b.pattern.label() << ','
          << to_string(b.cls) << ',' << format_double(b.probability) << '\n';
    }
    rj["patterns"] = std::move(pats);
    arr.push_back(std::move(rj));
  }
  nlohmann::ordered_json j;
  j["detector"] = {{"resolving", c.detector.resolving},
                   {"eta", c.detector.efficiency},
                   {"dark", c.detector.dark_rate}};
  j["rows"] = std::move(arr);
  emit.emit(j.dump(2), csv.str());
}

void cmd_sweep(const Flags& f, const ProtocolConfig& c, const Emitter& emit) {
  SweepParameter param;
  try {
    param = sweep_parameter_from_string(f.sweep_param);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (f.sweep_values.empty()) throw ConfigError("sweep needs --values");
  auto rows = sweep(c, param, f.sweep_values);
  emit.emit(to_json(rows, param).dump(2), to_csv(rows, param));
}

void add_shared_flags(CLI::App& app, Flags& f) {
  app.add_option("--n", f.n, "number of parties");
  app.add_option("--p", f.p, "pair-emission probability per pulse");
  app.add_option("--jmax", f.jmax, "series truncation order");
  app.add_option("--eta", f.eta, "detector efficiency");
  app.add_option("--dark", f.dark, "dark-click probability per detector per shot");
  app.add_option("--resolving", f.resolving, "number-resolving detectors (true/false)");
  app.add_option("--fp", f.fp, "pump repetition rate in Hz");
  app.add_option("--trials", f.trials, "Monte Carlo shots");
  app.add_option("--seed", f.seed, "Monte Carlo seed");
  app.add_option("--engine", f.engine, "exact or montecarlo");
  app.add_option("--config", f.config_path, "JSON config file");
  app.add_option("--out", f.out_path, "output path (default: stdout)");
  app.add_option("--format", f.format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
  app.add_option("--dump-state", f.dump_state, "write the source state as JSON");
  app.add_flag("--print-config", f.print_config, "print the effective config and exit");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"GHZ entanglement protocol simulator"};
  app.require_subcommand(1, 1);
  Flags flags;

  auto* pair = app.add_subcommand("pair", "dump the truncated ensemble-photon pair state");
  auto* ghz = app.add_subcommand("ghz", "herald ensemble GHZ states through the photon analyzer");
  auto* photon = app.add_subcommand("photon-ghz", "herald photonic GHZ states by measuring the ensembles");
  auto* bell = app.add_subcommand("bell", "four Bell inputs through the two-photon analyzer");
  auto* sweep_cmd = app.add_subcommand("sweep", "run the protocol over a parameter list");
  for (auto* sub : {pair, ghz, photon, bell, sweep_cmd}) add_shared_flags(*sub, flags);
  sweep_cmd->add_option("--param", flags.sweep_param, "p, n or eta")->check(CLI::IsMember({"p", "n", "eta"}));
  sweep_cmd->add_option("--values", flags.sweep_values, "values to sweep")->delimiter(',');

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    ProtocolConfig config = effective_config(flags);
    if (ghz->parsed()) config.direction = Direction::EnsembleGhz;
    if (photon->parsed()) config.direction = Direction::PhotonGhz;
    validate_or_throw(config);
    if (flags.print_config) {
      out << to_json(config).dump(2) << '\n';
      return 0;
    }
    if (!flags.dump_state.empty() && (bell->parsed() || sweep_cmd->parsed())) {
      throw ConfigError("--dump-state applies to pair, ghz and photon-ghz only");
    }
    Emitter emit(flags, out);
    if (pair->parsed()) cmd_pair(flags, config, emit);
    if (ghz->parsed() || photon->parsed()) cmd_protocol(flags, config, emit);
    if (bell->parsed()) cmd_bell(config, emit);
    if (sweep_cmd->parsed()) cmd_sweep(flags, config, emit);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace ghzsim
