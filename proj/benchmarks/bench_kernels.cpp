#include <benchmark/benchmark.h>

#include "shearstab/airy.hpp"
#include "shearstab/evolution.hpp"
#include "shearstab/nonlinear.hpp"
#include "shearstab/orr_sommerfeld.hpp"
#include "shearstab/random_field.hpp"
#include "shearstab/rayleigh.hpp"

using namespace shearstab;

namespace {

const FlowProfile& poiseuille() {
  static const FlowProfile p = make_profile(ProfileKind::poiseuille);
  return p;
}

void BM_Workspace(benchmark::State& state) {
  for (auto _ : state) {
    SpectralWorkspace ws(static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(ws.helmholtz(1));
  }
}
BENCHMARK(BM_Workspace)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_HelmholtzSolve(benchmark::State& state) {
  const SpectralWorkspace ws(static_cast<int>(state.range(0)));
  const Field w = random_field(ws, 1, 1);
  ws.helmholtz(1);
  for (auto _ : state) benchmark::DoNotOptimize(helmholtz_solve(ws, 1, w));
}
BENCHMARK(BM_HelmholtzSolve)->Arg(64)->Arg(128)->Arg(256);

void BM_OrrSommerfeldSolve(benchmark::State& state) {
  const SpectralWorkspace ws(static_cast<int>(state.range(0)));
  const Field F = random_field(ws, 1, 2);
  const OSProblem prob{1e-4, 1, 0.5, BoundaryCondition::non_slip};
  for (auto _ : state) benchmark::DoNotOptimize(solve_os(ws, poiseuille(), prob, F));
}
BENCHMARK(BM_OrrSommerfeldSolve)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ResolventEvaluate(benchmark::State& state) {
  const SpectralWorkspace ws(static_cast<int>(state.range(0)));
  const ResolventEvaluator ev(ws, poiseuille(), 1e-4, 1, BoundaryCondition::non_slip);
  const std::vector<NormPair> pairs{NormPair::L2_L2w, NormPair::Hm1_L2w, NormPair::L2_L2u};
  for (auto _ : state) benchmark::DoNotOptimize(ev.evaluate(0.5, pairs));
}
BENCHMARK(BM_ResolventEvaluate)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CoercivityProbe(benchmark::State& state) {
  const SpectralWorkspace ws(static_cast<int>(state.range(0)));
  const CoercivityProbe probe(ws, poiseuille(), 2, 0.5);
  const Field w = random_field(ws, 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(probe.evaluate(w));
}
BENCHMARK(BM_CoercivityProbe)->Arg(128)->Arg(256);

void BM_AiryScaled(benchmark::State& state) {
  const cplx z = std::polar(static_cast<double>(state.range(0)), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(airy_scaled(z));
}
BENCHMARK(BM_AiryScaled)->Arg(1)->Arg(10)->Arg(100);

void BM_ModeStep(benchmark::State& state) {
  const SpectralWorkspace ws(static_cast<int>(state.range(0)));
  const ModeStepper st(ws, poiseuille(), 1e-4, 1, 0.05, BoundaryCondition::non_slip);
  CVec w = seeded_data(ws, 1, 4).values;
  for (auto _ : state) {
    w = st.step(w, CVec());
    benchmark::DoNotOptimize(w.data());
  }
}
BENCHMARK(BM_ModeStep)->Arg(96)->Arg(192);

void BM_NonlinearRun(benchmark::State& state) {
  const SpectralWorkspace ws(96);
  const int K = static_cast<int>(state.range(0));
  const NonlinearData data = seeded_multimode(ws, K, 5);
  NonlinearOptions o;
  o.t_final = 5.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(run_nonlinear(ws, poiseuille(), 1e-4, K, data, 1e-4, o));
}
BENCHMARK(BM_NonlinearRun)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
