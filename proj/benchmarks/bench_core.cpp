#include <benchmark/benchmark.h>

#include <cmath>

#include "parahom/corrector.hpp"
#include "parahom/macro.hpp"
#include "parahom/smoothing.hpp"
#include "parahom/solver.hpp"

using namespace parahom;

namespace {

ScalarField wave(const Lattice& lat) {
  ScalarField f(lat);
  for (std::size_t s = 0; s < f.size(); ++s) {
    const SiteCoord c = site_coord(lat, s);
    f[s] = std::sin(0.7 * c[0]) * std::cos(0.3 * c[lat.dim]) + 0.1 * std::sin(1.3 * c[1]);
  }
  double m = 0.0;
  for (double v : f.values()) m += v;
  m /= static_cast<double>(f.size());
  for (double& v : f.values()) v -= m;
  return f;
}

EnsembleSpec checkerboard() {
  EnsembleSpec s;
  s.kind = EnsembleKind::checkerboard;
  s.phases = {0.5, 2.0};
  return s;
}

void BM_SpectralPoisson(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const ScalarField f = wave(make_lattice(2, n, n, n));
  for (auto _ : st) benchmark::DoNotOptimize(spectral_poisson(f));
}
BENCHMARK(BM_SpectralPoisson)->Arg(16)->Arg(32)->Arg(64);

void BM_SolveCell(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const CoefficientField a = sample(checkerboard(), make_lattice(2, n, n, n), 1);
  CellOptions o;
  o.method = st.range(1) ? CellMethod::time_marching : CellMethod::space_time;
  for (auto _ : st) benchmark::DoNotOptimize(solve_cell(a, 0.0, o));
}
BENCHMARK(BM_SolveCell)->Args({8, 0})->Args({8, 1})->Args({16, 0})->Args({16, 1})->Unit(benchmark::kMillisecond);

void BM_SmoothS(benchmark::State& st) {
  const Lattice lat = make_lattice(2, 64, 256, 1.0, 1.0 / 4096);
  const ScalarField f = wave(lat);
  for (auto _ : st) benchmark::DoNotOptimize(smooth_S(f, 0.125));
}
BENCHMARK(BM_SmoothS)->Unit(benchmark::kMillisecond);

void BM_SolveEps(benchmark::State& st) {
  const Lattice micro = make_lattice(2, 8, 8, 1.0, 0.125);
  const CoefficientField a = sample(checkerboard(), micro, 1);
  CylinderProblem p;
  p.box = 1.0;
  p.horizon = 1.0 / 64;
  p.eps = 1.0 / static_cast<double>(st.range(0));
  p.micro = micro;
  p.source = [](const std::array<double, kMaxDim>& x, double) { return std::sin(3.0 * x[0]) * x[1]; };
  for (auto _ : st) benchmark::DoNotOptimize(solve_eps(a, p));
}
BENCHMARK(BM_SolveEps)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
