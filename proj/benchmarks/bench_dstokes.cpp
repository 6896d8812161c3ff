#include <benchmark/benchmark.h>

#include <random>

#include "dstokes/boundary_solver.hpp"
#include "dstokes/counterexample.hpp"
#include "dstokes/heat_kernel.hpp"
#include "dstokes/helmholtz.hpp"
#include "dstokes/holder_norms.hpp"
#include "dstokes/layer_potentials.hpp"
#include "dstokes/nonlinear_coupled.hpp"

using namespace dstokes;

namespace {

SampledField random_field(std::size_t np, std::size_t nt) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < np; ++i) pts.push_back({U(rng), U(rng)});
  SampledField f(pts, linspace(0, 1, nt), 1);
  for (double& v : f.values()) v = U(rng);
  return f;
}

}  // namespace

static void BM_SpaceSeminormExact(benchmark::State& st) {
  const SampledField f = random_field(static_cast<std::size_t>(st.range(0)), 8);
  for (auto _ : st) benchmark::DoNotOptimize(space_seminorm(f, 0.5, ScanMode::Exact));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_SpaceSeminormExact)->RangeMultiplier(2)->Range(32, 256)->Complexity(benchmark::oNSquared);

static void BM_SpaceSeminormScreened(benchmark::State& st) {
  const SampledField f = random_field(static_cast<std::size_t>(st.range(0)), 8);
  for (auto _ : st) benchmark::DoNotOptimize(space_seminorm(f, 0.5, ScanMode::Screened));
}
BENCHMARK(BM_SpaceSeminormScreened)->RangeMultiplier(2)->Range(32, 256);

static void BM_MixedBoundarySeminorm(benchmark::State& st) {
  const SampledField f = random_field(64, static_cast<std::size_t>(st.range(0)));
  const DiniModulus eta = DiniModulus::log_power(2);
  for (auto _ : st) benchmark::DoNotOptimize(mixed_boundary_seminorm(f, 0.5, eta));
}
BENCHMARK(BM_MixedBoundarySeminorm)->Arg(8)->Arg(16);

static void BM_VolumePotential(benchmark::State& st) {
  const double t = 0.1 * static_cast<double>(st.range(0));
  const auto f = [](Vec2 y, double s) { return std::cos(y.x) * (1 + s); };
  for (auto _ : st) benchmark::DoNotOptimize(volume_potential_L0(f, {0.2, 0.1}, t));
}
BENCHMARK(BM_VolumePotential)->Arg(1)->Arg(4);

static void BM_KstarMatrix(benchmark::State& st) {
  const CurveNodes nd = BoundaryCurve::ellipse(2, 1).nodes(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kstar_matrix(nd));
}
BENCHMARK(BM_KstarMatrix)->Arg(64)->Arg(256);

static void BM_StokesLagOperator(benchmark::State& st) {
  const BoundaryCurve c = BoundaryCurve::circle(1);
  const CurveNodes nd = c.nodes(static_cast<int>(st.range(0)));
  const auto tg = node_targets(nd);
  for (auto _ : st)
    benchmark::DoNotOptimize(assemble_lag_operator(KernelKind::StokesTangential, c, nd, tg, 0.01, 8, {}, 1));
}
BENCHMARK(BM_StokesLagOperator)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_LerayProjection(benchmark::State& st) {
  const BoxSpec box{{0, 0}, 8.0, static_cast<int>(st.range(0))};
  const auto f = PeriodicGridField::from_function(box, {0.0}, 2, [](Vec2 x, double, double* o) {
    o[0] = std::sin(x.x) * std::cos(2 * x.y);
    o[1] = std::exp(-norm2(x));
  });
  for (auto _ : st) benchmark::DoNotOptimize(leray_project(f));
}
BENCHMARK(BM_LerayProjection)->Arg(64)->Arg(256);

static void BM_BoundarySystemSlab(benchmark::State& st) {
  const BoundaryCurve c = BoundaryCurve::circle(1);
  const CurveNodes nd = c.nodes(32);
  SampledField g(nd.pos, linspace(0, 0.05, 9), 2);
  for (int j = 0; j < nd.M; ++j)
    for (std::size_t k = 0; k < g.n_times(); ++k) {
      const double s = g.times()[k];
      const Vec2 v = (s * std::cos(2 * nd.theta[j])) * nd.tangent[j] + (s * std::sin(nd.theta[j])) * nd.normal[j];
      g.at(j, k, 0) = v.x;
      g.at(j, k, 1) = v.y;
    }
  for (auto _ : st) benchmark::DoNotOptimize(solve_boundary_system(g, c, 0.05));
}
BENCHMARK(BM_BoundarySystemSlab)->Unit(benchmark::kMillisecond);

static void BM_HilbertTransformG2(benchmark::State& st) {
  const LineFunction g = g2_line(0.01, 0.5);
  for (auto _ : st) benchmark::DoNotOptimize(hilbert_transform(g, 0.05, static_cast<int>(st.range(0))));
}
BENCHMARK(BM_HilbertTransformG2)->Arg(1)->Arg(2);

static void BM_CoupledPicardStep(benchmark::State& st) {
  const NonlinearRHS ks = keller_segel_instance([](double) { return 1.0; }, [](double c) { return c; },
                                                [](Vec2) { return Vec2{0, 1}; });
  CoupledData d;
  d.rho0 = [](Vec2 x) { return 1 + 0.5 * std::cos(kPi * x.x); };
  d.theta0 = [](Vec2 x) { return 0.5 + 0.3 * std::cos(kPi * x.y); };
  CoupledOptions o;
  o.n = static_cast<int>(st.range(0));
  o.steps = 10;
  Trajectory tr(11, initial_state(d, o.n));
  for (int k = 0; k <= 10; ++k) tr[k].time = 0.005 * k;
  for (auto _ : st) benchmark::DoNotOptimize(picard_step(tr, ks, o));
}
BENCHMARK(BM_CoupledPicardStep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
