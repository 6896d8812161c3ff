#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dstokes {

/// Settings of one CLI run. Read from a key = value file, then overridden by
/// command line flags. Unset optionals take per-experiment defaults.
struct RunConfig {
  std::string subcommand;
  std::string geometry = "circle 1";
  double alpha = 0.5;
  std::string eta = "log2";
  std::optional<double> tol;
  std::optional<int> M, steps, n, levels, resolution, n_t, sets, points, times;
  std::optional<double> T, slab_T, t_min, t_max;
  double flux = 0.0;  // net outflow added to the stokes-solve datum
  bool neumann = false;
  std::string suite = "identities";     // kernels-verify
  std::string case_name = "potential";  // stokes-solve
  std::string input;                    // norms
  std::string mode = "exact";           // norms: exact | screened
  bool boundary = false;                // norms: also the mixed boundary seminorm
  std::string out = "out";
  std::uint64_t seed = 1;
  int workers = 1;

  /// Assigns one key from its text form. Throws InvalidInput on unknown keys
  /// and malformed values.
  void set(const std::string& key, const std::string& value);
  /// Range checks. Throws InvalidInput.
  void validate() const;
  /// Every key with its current value, in schema order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Known keys in schema order with a one-line description.
const std::vector<std::pair<std::string, std::string>>& config_schema();

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
/// Returns the pairs in file order. Throws InvalidInput.
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text);

/// Reads and applies a config file onto `cfg`.
void load_config_file(const std::string& path, RunConfig& cfg);

}  // namespace dstokes
