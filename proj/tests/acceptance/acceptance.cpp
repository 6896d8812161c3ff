// Acceptance driver: one CLI invocation per criterion, verdicts recomputed
// from the written artifacts with closed forms and fits local to this file.
//
// usage: acceptance <dstokes binary> <work dir> [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int col(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return static_cast<int>(k);
    throw std::runtime_error("missing column " + name);
  }
  double num(std::size_t r, const std::string& name) const { return std::stod(rows[r][col(name)]); }
  const std::string& str(std::size_t r, const std::string& name) const { return rows[r][col(name)]; }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Csv read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  Csv c;
  std::string line;
  std::getline(in, line);
  c.header = split(line);
  while (std::getline(in, line))
    if (!line.empty()) c.rows.push_back(split(line));
  return c;
}

Json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return Json::parse(in);
}

// least squares y = a + b x; returns {b, r2}
std::pair<double, double> fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  const double b = sxy / sxx;
  const double r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return {b, r2};
}

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [FAILED]");
  }
};

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

struct Runner {
  fs::path cli, work;
  // Runs the CLI; returns exit code and wall seconds.
  std::pair<int, double> run(const std::string& args, const fs::path& out) const {
    fs::create_directories(out);
    const std::string cmd = "\"" + cli.string() + "\" " + args + " --out \"" + out.string() + "\" > \"" +
                            (out / "stdout.txt").string() + "\" 2>&1";
    const auto t0 = std::chrono::steady_clock::now();
    const int rc = std::system(cmd.c_str());
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, s};
  }
};

Verdict criterion1(const Runner& r) {
  Verdict v;
  const fs::path out = r.work / "c1";
  const auto [rc, s] = r.run("kernels-verify --suite identities", out);
  v.require(rc == 0, "exit " + std::to_string(rc));
  const Csv c = read_csv(out / "kernels_identities_residuals.csv");
  double mass = 0, vol = 0, harm = 0;
  for (std::size_t k = 0; k < c.rows.size(); ++k) {
    const std::string& id = c.str(k, "identity");
    const double val = c.num(k, "value");
    if (id == "gamma_mass") mass = std::max(mass, std::abs(val - 1.0));
    if (id == "lambda0_of_one") vol = std::max(vol, std::abs(val - c.num(k, "t")));
    if (id == "newtonian_laplacian") harm = std::max(harm, std::abs(val));
  }
  v.require(mass < 1e-10, "|int Gamma - 1| = " + num(mass));
  v.require(vol < 1e-8, "|Lambda0(1) - t| = " + num(vol));
  v.require(harm < 1e-6, "|Lap_h N| = " + num(harm));
  v.require(s < 10, "runtime " + num(s) + " s");
  return v;
}

Verdict criterion2(const Runner& r) {
  Verdict v;
  const fs::path out = r.work / "c2";
  const auto [rc, s] = r.run("kernels-verify --suite circle", out);
  v.require(rc == 0, "exit " + std::to_string(rc));
  const Csv c = read_csv(out / "kernels_circle_residuals.csv");
  double worst = 0;
  std::set<double> radii;
  for (std::size_t k = 0; k < c.rows.size(); ++k)
    if (c.str(k, "density") != "one_plus_kstar_one") {
      worst = std::max(worst, c.num(k, "max_abs_kstar"));
      radii.insert(c.num(k, "R"));
    }
  v.require(radii == std::set<double>{0.5, 1.0, 2.0}, "radii 0.5, 1, 2");
  v.require(worst < 1e-8, "max |K* psi| = " + num(worst));
  v.require(s < 10, "runtime " + num(s) + " s");
  return v;
}

Verdict criterion3(const Runner& r) {
  Verdict v;
  const fs::path out = r.work / "c3";
  const auto [rc, s] = r.run("heat-solve --set M=128 --set steps=64 --set levels=3", out);
  v.require(rc == 0, "exit " + std::to_string(rc));
  const Json j = read_json(out / "heat_solve.json");
  const double x0 = j["summary"]["source_centre"][0], y0 = j["summary"]["source_centre"][1];
  v.require(std::hypot(x0, y0) > 1.0, "source outside the disk");
  const Csv sol = read_csv(out / "heat_solve_solution.csv");
  double e = 0;
  for (std::size_t k = 0; k < sol.rows.size(); ++k) {
    const double x = sol.num(k, "x"), y = sol.num(k, "y"), t = sol.num(k, "t") + 1;
    const double r2 = (x - x0) * (x - x0) + (y - y0) * (y - y0);
    const double exact = std::exp(-r2 / (4 * t)) / (4 * kPi * t);
    e = std::max(e, std::abs(sol.num(k, "u") - exact));
  }
  v.require(e < 1e-3, "max error at M=128/64 " + num(e));
  const Csv lv = read_csv(out / "heat_solve_levels.csv");
  double min_order = 1e9;
  for (std::size_t k = 1; k < lv.rows.size(); ++k)
    min_order = std::min(min_order, std::log2(lv.num(k - 1, "max_error") / lv.num(k, "max_error")));
  v.require(lv.rows.size() == 3 && min_order >= 1.0, "min order over two refinements " + num(min_order));
  v.require(std::abs(lv.num(2, "max_error") - e) <= 1e-12 + 1e-9 * e, "reported error matches");
  v.require(s < 120, "runtime " + num(s) + " s");
  return v;
}

Verdict criterion4(const Runner& r) {
  Verdict v;
  const fs::path out = r.work / "c4";
  const auto [rc, s] = r.run("stokes-solve --case potential --set M=128 --set steps=64 --set levels=2", out);
  v.require(rc == 0, "exit " + std::to_string(rc));
  const Csv sol = read_csv(out / "stokes_potential_solution.csv");
  std::map<std::string, std::pair<double, double>> em;  // profile -> (max err, max |u|)
  double min_dist = 1;
  for (std::size_t k = 0; k < sol.rows.size(); ++k) {
    const std::string& p = sol.str(k, "profile");
    const double x = sol.num(k, "x"), y = sol.num(k, "y"), t = sol.num(k, "t");
    const double ex = p == "x1^2-x2^2" ? 2 * x * t * t : y * t * t;
    const double ey = p == "x1^2-x2^2" ? -2 * y * t * t : x * t * t;
    auto& [e, m] = em[p];
    e = std::max(e, std::hypot(sol.num(k, "u1") - ex, sol.num(k, "u2") - ey));
    m = std::max(m, std::hypot(ex, ey));
    min_dist = std::min(min_dist, 1 - std::hypot(x, y));
  }
  v.require(em.size() == 2, "both profiles present");
  v.require(min_dist >= 0.2 - 1e-9, "targets at distance >= 0.2");
  for (const auto& [p, em2] : em) v.require(em2.first / em2.second < 1e-2, p + " rel error " + num(em2.first / em2.second));
  const Csv lv = read_csv(out / "stokes_potential_levels.csv");
  std::map<std::string, std::vector<double>> errs;
  for (std::size_t k = 0; k < lv.rows.size(); ++k) errs[lv.str(k, "profile")].push_back(lv.num(k, "rel_error"));
  for (const auto& [p, e] : errs)
    v.require(e.size() == 2 && e[1] < e[0], p + " refinement " + num(e[0]) + " -> " + num(e[1]));
  v.require(s < 600, "runtime " + num(s) + " s");
  return v;
}

Verdict criterion5(const Runner& r) {
  Verdict v;
  const fs::path out = r.work / "c5";
  const auto [rc, s] = r.run("stokes-solve --case contraction --set slab_T=0.05 --seed 7", out);
  v.require(rc == 0, "exit " + std::to_string(rc));
  const Csv c = read_csv(out / "stokes_contraction_slabs.csv");
  v.require(std::abs(c.num(0, "slab_T") - 0.05) < 1e-12, "first slab 0.05");
  v.require(c.num(0, "contraction") <= 0.5, "ratio at slab_T 0.05 = " + num(c.num(0, "contraction")));
  for (std::size_t k = 1; k < c.rows.size(); ++k)
    v.require(c.num(k, "contraction") < c.num(k - 1, "contraction"),
              "slab " + num(c.num(k, "slab_T")) + " ratio " + num(c.num(k, "contraction")));
  v.require(s < 300, "runtime " + num(s) + " s");
  return v;
}

Verdict criterion6(const Runner& r) {
  Verdict v;
  const fs::path out = r.work / "c6";
  const auto [rc, s] = r.run("kernels-verify --suite scalings --set alpha=0.5", out);
  v.require(rc == 0, "exit " + std::to_string(rc));
  const Csv c = read_csv(out / "kernels_scalings_seminorms.csv");
  std::vector<double> lT, l0, l1;
  for (std::size_t k = 0; k < c.rows.size(); ++k) {
    lT.push_back(std::log(c.num(k, "T")));
    l0.push_back(std::log(c.num(k, "lambda0")));
    l1.push_back(std::log(c.num(k, "grad")));
  }
  const double p0 = fit(lT, l0).first, p1 = fit(lT, l1).first;
  v.require(c.rows.size() >= 4, "four horizons");
  v.require(std::abs(p0 - 0.75) <= 0.15, "Lambda0 exponent " + num(p0));
  v.require(std::abs(p1 - 0.5) <= 0.15, "grad Lambda0 exponent " + num(p1));
  v.require(s < 300, "runtime " + num(s) + " s");
  return v;
}

Verdict criterion7(const Runner& r) {
  Verdict v;
  const fs::path out = r.work / "c7";
  const auto [rc, s] = r.run("counterexample --set levels=4", out);
  v.require(rc == 0, "exit " + std::to_string(rc));
  const Csv d = read_csv(out / "counterexample_dini.csv");
  const std::size_t L = d.rows.size();
  bool inc = true;
  for (std::size_t k = 1; k < L; ++k) inc = inc && d.num(k, "mixed") > d.num(k - 1, "mixed");
  const double growth = d.num(L - 1, "mixed") / d.num(0, "mixed");
  double drift = 0;
  for (std::size_t k = L - 2; k < L; ++k)
    drift = std::max(drift, std::abs(d.num(k, "parabolic") / d.num(k - 1, "parabolic") - 1));
  v.require(L == 4 && inc, "mixed seminorm strictly increasing over 4 levels");
  v.require(growth >= 10, "growth x" + num(growth));
  v.require(drift < 0.05, "parabolic drift " + num(drift));
  const Csv q = read_csv(out / "counterexample_quotient.csv");
  std::vector<double> x, y, y2;
  double tmin = 1, tmax = 0;
  for (std::size_t k = 0; k < q.rows.size(); ++k) {
    x.push_back(q.num(k, "ln_inv_t"));
    y.push_back(q.num(k, "Q"));
    y2.push_back(q.num(k, "Q_refined"));
    tmin = std::min(tmin, q.num(k, "t"));
    tmax = std::max(tmax, q.num(k, "t"));
  }
  const auto [b, r2] = fit(x, y);
  const double b2 = fit(x, y2).first;
  v.require(std::abs(tmin - 1e-4) < 1e-12 && std::abs(tmax - 1e-1) < 1e-12, "t in [1e-4, 1e-1]");
  v.require(b > 0, "Q slope " + num(b));
  v.require(r2 > 0.95, "R^2 " + num(r2));
  v.require(std::abs(b2 - b) / std::abs(b) < 0.05, "slope drift " + num(std::abs(b2 - b) / std::abs(b)));
  v.require(s < 300, "runtime " + num(s) + " s");
  return v;
}

Verdict criterion8(const Runner& r) {
  Verdict v;
  const fs::path out = r.work / "c8";
  const auto [rc, s] = r.run("chemotaxis --set n=64", out);
  v.require(rc == 0, "exit " + std::to_string(rc));
  const Csv m = read_csv(out / "chemotaxis_mass.csv");
  const double m0 = m.num(0, "mass");
  double rate = 0;
  for (std::size_t k = 1; k < m.rows.size(); ++k)
    rate = std::max(rate, std::abs(m.num(k, "mass") - m0) / m0 / m.num(k, "t"));
  v.require(rate < 1e-6, "mass drift rate " + num(rate));
  const Csv sn = read_csv(out / "chemotaxis_snapshots.csv");
  double th0 = -1e300, excess = 0;
  for (std::size_t k = 0; k < sn.rows.size(); ++k)
    if (sn.num(k, "t") == 0.0) th0 = std::max(th0, sn.num(k, "theta"));
  for (std::size_t k = 0; k < sn.rows.size(); ++k) excess = std::max(excess, sn.num(k, "theta") - th0);
  v.require(excess < 1e-8, "oxygen max excess " + num(excess));
  const Json j = read_json(out / "chemotaxis.json");
  const auto& rep = j["summary"]["iteration_report"];
  v.require(rep["converged"].get<bool>(), "converged");
  std::vector<double> d = rep["differences"].get<std::vector<double>>();
  const double floor = 1e-12 * rep["norms"].back().get<double>();
  // two-step ratios from the second difference on (one-iteration lag between rho and theta)
  std::vector<double> q;
  for (std::size_t k = 1; k + 2 < d.size(); ++k)
    if (d[k + 2] > floor && d[k] > floor) q.push_back(std::sqrt(d[k + 2] / d[k]));
  double dev = 0;
  for (std::size_t k = 1; k < q.size(); ++k) dev = std::max(dev, std::abs(q[k] / q[k - 1] - 1));
  v.require(q.size() >= 2, std::to_string(q.size()) + " resolved ratios");
  v.require(dev < 0.3, "ratio quotient deviation " + num(dev));
  v.require(s < 600, "runtime " + num(s) + " s");
  return v;
}

Verdict criterion9(const Runner& r) {
  Verdict v;
  const fs::path out = r.work / "c9";
  const auto [rc, s] = r.run("stokes-solve --case stability --set sets=20", out);
  v.require(rc == 0, "exit " + std::to_string(rc));
  const Csv c = read_csv(out / "stokes_stability_sets.csv");
  double cmin = 1e300, cmax = 0, fmin = 1e300, fmax = 0, growth = 0;
  for (std::size_t k = 0; k < c.rows.size(); ++k) {
    const double a = c.num(k, "ratio_coarse"), b = c.num(k, "ratio_fine");
    cmin = std::min(cmin, a);
    cmax = std::max(cmax, a);
    fmin = std::min(fmin, b);
    fmax = std::max(fmax, b);
    growth = std::max(growth, b / a);
  }
  v.require(c.rows.size() == 20, std::to_string(c.rows.size()) + " data sets");
  v.require(cmax / cmin < 10, "spread " + num(cmax / cmin));
  v.require(fmax / fmin < 10, "refined spread " + num(fmax / fmin));
  v.require(growth <= 1.05, "max growth under refinement " + num(growth));
  v.detail << "; runtime " << num(s) << " s";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <dstokes> <work dir> [criteria...]\n";
    return 2;
  }
  Runner r{fs::absolute(argv[1]), fs::absolute(argv[2])};
  fs::create_directories(r.work);
  const std::vector<std::function<Verdict(const Runner&)>> all{criterion1, criterion2, criterion3,
                                                               criterion4, criterion5, criterion6,
                                                               criterion7, criterion8, criterion9};
  std::set<int> pick;
  for (int k = 3; k < argc; ++k) pick.insert(std::atoi(argv[k]));
  bool ok = true;
  for (int k = 1; k <= 9; ++k) {
    if (!pick.empty() && !pick.count(k)) continue;
    Verdict v;
    try {
      v = all[k - 1](r);
    } catch (const std::exception& e) {
      v.require(false, std::string("error: ") + e.what());
    }
    ok = ok && v.pass;
    std::cout << "CRITERION " << k << " " << (v.pass ? "PASS" : "FAIL") << ": " << v.detail.str() << std::endl;
  }
  return ok ? 0 : 1;
}
