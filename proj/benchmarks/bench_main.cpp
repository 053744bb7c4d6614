#include <benchmark/benchmark.h>

#include <cmath>

#include "nsfc/fields.hpp"
#include "nsfc/functionals.hpp"
#include "nsfc/parallel.hpp"
#include "nsfc/shift.hpp"
#include "nsfc/solver.hpp"
#include "nsfc/thermo.hpp"

namespace {

using namespace nsfc;

thermo::ThermoParams params() { return thermo::ThermoParams::make(1.0, 1.0, 3.0, 0.1, 1.0, 0.0); }

fields::Field contact_field(int dim, int n) {
  thermo::ThermoParams p = params();
  func::ContactState c = func::make_contact(p, 1.0, 2.0, 0.5);
  fields::PeriodicGrid g = fields::PeriodicGrid::make(dim, n);
  return solver::init_contact_perturbed(g, p, c, 8.0 / n, 0.05, 1);
}

void BM_step_1d(benchmark::State& state) {
  thermo::ThermoParams p = params();
  solver::SolverConfig cfg;
  fields::Field U = contact_field(1, 512);
  for (auto _ : state) {
    fields::Field work = U;
    benchmark::DoNotOptimize(solver::step(work, p, cfg));
  }
}
BENCHMARK(BM_step_1d);

void BM_step_3d(benchmark::State& state) {
  thermo::ThermoParams p = params();
  solver::SolverConfig cfg;
  fields::Field U = contact_field(3, 32);
  for (auto _ : state) {
    fields::Field work = U;
    benchmark::DoNotOptimize(solver::step(work, p, cfg));
  }
}
BENCHMARK(BM_step_3d);

void BM_mollify(benchmark::State& state) {
  fields::PeriodicGrid g = fields::PeriodicGrid::make(2, 256);
  fields::MollifierKernel k = fields::MollifierKernel::make(g, 0.05);
  fields::Field f(g, 1);
  for (std::size_t i = 0; i < g.cells(); ++i)
    f(0, i) = std::sin(6.283185307179586 * g.center(g.coords(i)[0]));
  for (auto _ : state) benchmark::DoNotOptimize(fields::mollify(f, k));
}
BENCHMARK(BM_mollify);

void BM_integrate(benchmark::State& state) {
  fields::PeriodicGrid g = fields::PeriodicGrid::make(1, 1 << 20);
  fields::Field f(g, 1);
  for (std::size_t i = 0; i < g.cells(); ++i) f(0, i) = std::cos(0.001 * i);
  for (auto _ : state) benchmark::DoNotOptimize(fields::integrate(f));
}
BENCHMARK(BM_integrate);

void BM_trace(benchmark::State& state) {
  thermo::ThermoParams p = params();
  solver::SolverConfig cfg;
  cfg.t_end = 0.02;
  fields::Field U = contact_field(1, 512);
  solver::RunRecord rec = solver::run(U, p, cfg, 4);
  shift::VelocityHistory hist = shift::velocity_history(rec, 0.05);
  double t = rec.frame_times.back();
  for (auto _ : state) {
    std::array<double, 3> x{0.3, 0.0, 0.0};
    benchmark::DoNotOptimize(shift::trace_characteristic(hist, x, t, 2));
  }
}
BENCHMARK(BM_trace);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
