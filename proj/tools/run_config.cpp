#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "dstokes/common.hpp"
#include "dstokes/holder_norms.hpp"

namespace dstokes {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw InvalidInput("config key '" + key + "': cannot parse '" + v + "' as a number");
  return out;
}

bool parse_flag(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidInput("config key '" + key + "': expected true or false, got '" + v + "'");
}

std::string show(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
template <class T>
std::string show(const std::optional<T>& v) {
  if (!v) return "default";
  if constexpr (std::is_same_v<T, double>) return show(*v);
  else return std::to_string(*v);
}

struct KeyHandler {
  std::string key, help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<KeyHandler>& handlers() {
  static const std::vector<KeyHandler> h = [] {
    std::vector<KeyHandler> v;
    auto text = [&](std::string k, std::string help, std::string RunConfig::*m) {
      v.push_back({k, help, [m](RunConfig& c, const std::string& s) { c.*m = s; },
                   [m](const RunConfig& c) { return c.*m; }});
    };
    auto real = [&](std::string k, std::string help, double RunConfig::*m) {
      v.push_back({k, help,
                   [m, k](RunConfig& c, const std::string& s) { c.*m = parse_number<double>(k, s); },
                   [m](const RunConfig& c) { return show(c.*m); }});
    };
    auto opt_real = [&](std::string k, std::string help, std::optional<double> RunConfig::*m) {
      v.push_back({k, help,
                   [m, k](RunConfig& c, const std::string& s) { c.*m = parse_number<double>(k, s); },
                   [m](const RunConfig& c) { return show(c.*m); }});
    };
    auto opt_int = [&](std::string k, std::string help, std::optional<int> RunConfig::*m) {
      v.push_back({k, help,
                   [m, k](RunConfig& c, const std::string& s) { c.*m = parse_number<int>(k, s); },
                   [m](const RunConfig& c) { return show(c.*m); }});
    };
    auto flag = [&](std::string k, std::string help, bool RunConfig::*m) {
      v.push_back({k, help,
                   [m, k](RunConfig& c, const std::string& s) { c.*m = parse_flag(k, s); },
                   [m](const RunConfig& c) { return std::string(c.*m ? "true" : "false"); }});
    };
    text("subcommand", "must match the invoked subcommand when present", &RunConfig::subcommand);
    text("geometry", "\"circle R\", \"ellipse a b\", \"star k eps\" or a theta,x,y CSV path",
         &RunConfig::geometry);
    real("alpha", "Holder exponent in (0,1)", &RunConfig::alpha);
    text("eta", "Dini modulus preset: log2, log1, power:<beta>", &RunConfig::eta);
    opt_real("tol", "iteration tolerance", &RunConfig::tol);
    opt_int("M", "boundary nodes (finest level)", &RunConfig::M);
    opt_int("steps", "time steps (finest level)", &RunConfig::steps);
    opt_int("n", "grid cells per axis (chemotaxis)", &RunConfig::n);
    opt_int("levels", "refinement levels", &RunConfig::levels);
    opt_int("resolution", "quadrature panels per octave (counterexample)", &RunConfig::resolution);
    opt_int("n_t", "points of the t sweep (counterexample)", &RunConfig::n_t);
    opt_int("sets", "random data sets (stokes-solve stability)", &RunConfig::sets);
    opt_int("points", "sample points per axis (scalings)", &RunConfig::points);
    opt_int("times", "sample times per horizon (scalings)", &RunConfig::times);
    opt_real("T", "final time", &RunConfig::T);
    opt_real("slab_T", "slab length (stokes-solve contraction)", &RunConfig::slab_T);
    opt_real("t_min", "smallest sweep time (counterexample)", &RunConfig::t_min);
    opt_real("t_max", "largest sweep time (counterexample)", &RunConfig::t_max);
    real("flux", "net outflow added to the potential-flow datum", &RunConfig::flux);
    flag("neumann", "heat-solve with Neumann data", &RunConfig::neumann);
    text("suite", "kernels-verify suite: identities, circle, scalings", &RunConfig::suite);
    text("case", "stokes-solve case: potential, contraction, stability", &RunConfig::case_name);
    text("input", "field CSV for norms", &RunConfig::input);
    text("mode", "norms scan mode: exact, screened", &RunConfig::mode);
    flag("boundary", "norms: also the mixed boundary seminorm", &RunConfig::boundary);
    text("out", "output directory", &RunConfig::out);
    v.push_back({"seed", "random seed",
                 [](RunConfig& c, const std::string& s) {
                   c.seed = parse_number<std::uint64_t>("seed", s);
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    v.push_back({"workers", "worker threads (results do not depend on it)",
                 [](RunConfig& c, const std::string& s) { c.workers = parse_number<int>("workers", s); },
                 [](const RunConfig& c) { return std::to_string(c.workers); }});
    return v;
  }();
  return h;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const KeyHandler& h : handlers())
    if (h.key == key) {
      h.set(*this, value);
      return;
    }
  throw InvalidInput("unknown config key '" + key + "'");
}

void RunConfig::validate() const {
  auto positive = [](const char* k, const auto& v) {
    if (v && *v <= 0) throw InvalidInput(std::string("config key '") + k + "' must be positive");
  };
  if (!(alpha > 0 && alpha < 1)) throw InvalidInput("alpha must lie in (0,1)");
  positive("tol", tol);
  positive("M", M);
  positive("steps", steps);
  positive("n", n);
  positive("levels", levels);
  positive("resolution", resolution);
  positive("n_t", n_t);
  positive("sets", sets);
  positive("points", points);
  positive("times", times);
  positive("T", T);
  positive("slab_T", slab_T);
  positive("t_min", t_min);
  positive("t_max", t_max);
  if (M && *M % 2) throw InvalidInput("M must be even");
  if (!std::isfinite(flux)) throw InvalidInput("flux must be finite");
  if (workers < 1) throw InvalidInput("workers must be >= 1");
  if (mode != "exact" && mode != "screened") throw InvalidInput("mode must be exact or screened");
  DiniModulus::preset(eta);
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> e;
  for (const KeyHandler& h : handlers()) e.emplace_back(h.key, h.get(*this));
  return e;
}

const std::vector<std::pair<std::string, std::string>>& config_schema() {
  static const auto s = [] {
    std::vector<std::pair<std::string, std::string>> v;
    for (const KeyHandler& h : handlers()) v.emplace_back(h.key, h.help);
    return v;
  }();
  return s;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidInput("config line " + std::to_string(lineno) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  for (const auto& [k, v] : parse_key_values(ss.str())) cfg.set(k, v);
}

}  // namespace dstokes
