// dstokes: runs one experiment per invocation and writes JSON + CSV artifacts.
// Exit codes: 0 all checks pass, 1 a check or solver failed, 2 input error.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "dstokes/common.hpp"
#include "experiments.hpp"

namespace {

constexpr int kExitPass = 0, kExitFail = 1, kExitInput = 2;
constexpr const char* kOutEnv = "DSTOKES_OUT";

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::vector<std::string> set;
  std::optional<std::string> suite, case_name, input, mode;
  bool boundary = false;
};

void add_common(CLI::App* sc, Flags& f) {
  sc->add_option("--config", f.config, "key = value config file");
  sc->add_option("--out", f.out, "output directory (overrides $" + std::string(kOutEnv) + " and the config)");
  sc->add_option("--seed", f.seed, "random seed");
  sc->add_option("--workers", f.workers, "worker threads");
  sc->add_option("--set", f.set, "extra key=value override, repeatable");
}

void print_outcome(const dstokes::Outcome& o, const std::filesystem::path& dir) {
  for (const dstokes::Check& c : o.checks) {
    std::cout << (c.pass ? "PASS  " : "FAIL  ") << c.name << ": " << dstokes::fmt(c.value) << " ";
    if (c.relation == "within")
      std::cout << "within " << dstokes::fmt(c.bound) << " of " << dstokes::fmt(c.centre);
    else
      std::cout << c.relation << " " << dstokes::fmt(c.bound);
    std::cout << "\n";
  }
  std::cout << o.experiment << ": " << (o.pass() ? "all checks pass" : "checks failed") << " ("
            << o.seconds << " s), artifacts in " << dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dstokes: heat and Stokes boundary-integral experiments"};
  app.require_subcommand(0, 1);
  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "print the config schema and exit");
  Flags f;
  CLI::App* kv = app.add_subcommand("kernels-verify", "kernel identity, circle operator and scaling suites");
  add_common(kv, f);
  kv->add_option("--suite", f.suite, "identities | circle | scalings");
  CLI::App* hs = app.add_subcommand("heat-solve", "manufactured heat IBVP with refinement study");
  add_common(hs, f);
  CLI::App* ss = app.add_subcommand("stokes-solve", "Stokes IBVP: potential flows, contraction, stability");
  add_common(ss, f);
  ss->add_option("--case", f.case_name, "potential | contraction | stability");
  CLI::App* ce = app.add_subcommand("counterexample", "Dini divergence and Holder quotient sweep");
  add_common(ce, f);
  CLI::App* ch = app.add_subcommand("chemotaxis", "Keller-Segel type coupled Picard iteration");
  add_common(ch, f);
  CLI::App* nm = app.add_subcommand("norms", "Holder, Dini and mixed seminorms of a field CSV");
  add_common(nm, f);
  nm->add_option("--input", f.input, "field CSV (x,y,t,v1,...)");
  nm->add_option("--mode", f.mode, "exact | screened");
  nm->add_flag("--boundary", f.boundary, "also the mixed boundary seminorm");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  if (list_keys) {
    for (const auto& [k, help] : dstokes::config_schema()) std::cout << k << "\t" << help << "\n";
    return kExitPass;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kExitInput;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  dstokes::RunConfig cfg;
  std::filesystem::path out_dir;
  try {
    if (!f.config.empty()) dstokes::load_config_file(f.config, cfg);
    if (!cfg.subcommand.empty() && cfg.subcommand != sub)
      throw dstokes::InvalidInput("config is for '" + cfg.subcommand + "', invoked '" + sub + "'");
    cfg.subcommand = sub;
    for (const std::string& kvp : f.set) {
      const auto pairs = dstokes::parse_key_values(kvp);
      if (pairs.size() != 1) throw dstokes::InvalidInput("--set expects key=value, got '" + kvp + "'");
      cfg.set(pairs[0].first, pairs[0].second);
    }
    if (const char* env = std::getenv(kOutEnv); env && *env) cfg.out = env;
    if (f.out) cfg.out = *f.out;
    if (f.seed) cfg.seed = *f.seed;
    if (f.workers) cfg.workers = *f.workers;
    if (f.suite) cfg.suite = *f.suite;
    if (f.case_name) cfg.case_name = *f.case_name;
    if (f.input) cfg.input = *f.input;
    if (f.mode) cfg.mode = *f.mode;
    if (f.boundary) cfg.boundary = true;
    cfg.validate();
    out_dir = cfg.out;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  dstokes::set_default_workers(cfg.workers);

  try {
    const auto t0 = std::chrono::steady_clock::now();
    dstokes::Outcome o = dstokes::run_experiment(cfg);
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    dstokes::write_artifacts(o, cfg, out_dir);
    print_outcome(o, out_dir);
    return o.pass() ? kExitPass : kExitFail;
  } catch (const dstokes::RejectedInput& e) {
    try {
      dstokes::write_artifacts(e.outcome, cfg, out_dir);
    } catch (const std::exception& w) {
      std::cerr << "error: " << w.what() << "\n";
    }
    std::cerr << "input error: " << e.what() << " (report in " << out_dir.string() << ")\n";
    return kExitInput;
  } catch (const dstokes::InvalidInput& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const dstokes::CompatibilityError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const dstokes::GeometryError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const dstokes::HypothesisViolation& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const dstokes::DegenerateModulus& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const dstokes::DiniViolation& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const dstokes::DomainError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const dstokes::StiffnessError& e) {
    std::cerr << "solver failure: " << e.what() << " (smallest T " << e.smallest_T << ")\n";
    return kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitFail;
  }
}
