#pragma once

#include <deque>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "run_config.hpp"

namespace dstokes {

using Json = nlohmann::ordered_json;

/// One pass/fail assertion of an experiment.
struct Check {
  std::string name;
  double value = 0;
  std::string relation;  // "<", "<=", ">", ">=", "within"
  double bound = 0;
  double centre = 0;     // "within": |value - centre| <= bound
  bool pass = false;
};

/// CSV table; cells are already formatted.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

struct Outcome {
  std::string experiment;
  Json summary = Json::object();
  std::vector<Check> checks;
  std::deque<Table> tables;  // references from table() stay valid
  double seconds = 0;  // wall time, written to a separate file

  bool pass() const;
  void check(const std::string& name, double value, const std::string& relation, double bound);
  void check_within(const std::string& name, double value, double centre, double tol);
  Table& table(const std::string& name, std::vector<std::string> columns);
};

/// Input rejected after partial analysis (for example incompatible data).
/// The report is written before exiting with the input-error code.
struct RejectedInput : std::runtime_error {
  RejectedInput(const std::string& msg, Outcome o)
      : std::runtime_error(msg), outcome(std::move(o)) {}
  Outcome outcome;
};

/// Shortest round-trip decimal form.
std::string fmt(double v);
std::string fmt(long long v);
inline std::string fmt(int v) { return fmt(static_cast<long long>(v)); }
inline std::string fmt(std::size_t v) { return fmt(static_cast<long long>(v)); }

// Experiments. Each reads the keys it needs from the config and applies its
// own defaults; see docs/cli.md.
Outcome run_kernel_identities(const RunConfig& c);
Outcome run_circle_operator(const RunConfig& c);
Outcome run_potential_scalings(const RunConfig& c);
Outcome run_heat_manufactured(const RunConfig& c);
Outcome run_stokes_potential(const RunConfig& c);
Outcome run_stokes_contraction(const RunConfig& c);
Outcome run_stokes_stability(const RunConfig& c);
Outcome run_counterexample(const RunConfig& c);
Outcome run_chemotaxis(const RunConfig& c);
Outcome run_norms(const RunConfig& c);

/// Dispatch on subcommand (and suite / case). Throws InvalidInput on unknown names.
Outcome run_experiment(const RunConfig& c);

/// <dir>/<experiment>.json, <dir>/<experiment>_<table>.csv and
/// <dir>/<experiment>_timing.json. Everything except the timing file is a
/// function of the config alone.
void write_artifacts(const Outcome& o, const RunConfig& c, const std::filesystem::path& dir);

}  // namespace dstokes
