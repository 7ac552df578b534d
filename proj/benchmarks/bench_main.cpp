/// @file bench_main.cpp
/// Microbenchmarks for the assembly and stepping hot paths.
#include <benchmark/benchmark.h>

#include "fsi/assembly.hpp"
#include "fsi/bench.hpp"
#include "fsi/linalg.hpp"
#include "fsi/mesh.hpp"
#include "fsi/schemes.hpp"

namespace {

fsi::Scenario desk_scenario(int n) {
  fsi::Scenario sc;
  sc.kind = fsi::Scenario::Kind::EllipseRelax;
  sc.n = n;
  return sc;
}

void BM_BuildUnitSquare(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fsi::build_unit_square(n));
}
BENCHMARK(BM_BuildUnitSquare)->Arg(32)->Arg(64);

void BM_CutSegment(benchmark::State& state) {
  fsi::FluidMesh mesh = fsi::build_unit_square(64);
  for (auto _ : state)
    benchmark::DoNotOptimize(fsi::cut_segment(mesh, {0.12345, 0.271}, {0.873, 0.642}));
}
BENCHMARK(BM_CutSegment);

void BM_AssembleFluidBlocks(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  fsi::FluidMesh mesh = fsi::build_unit_square(n);
  fsi::FluidParams params;
  for (auto _ : state)
    benchmark::DoNotOptimize(fsi::assemble_fluid_blocks(mesh, params, 0.05));
}
BENCHMARK(BM_AssembleFluidBlocks)->Arg(32)->Arg(64);

void BM_AssembleCoupling(benchmark::State& state) {
  fsi::Scenario sc = desk_scenario(static_cast<int>(state.range(0)));
  fsi::FluidMesh fmesh = sc.make_fluid();
  fsi::SolidMesh smesh = sc.make_solid();
  std::vector<double> d0 = sc.initial_displacement(smesh);
  std::vector<fsi::Vec2> phi(smesh.num_nodes());
  for (int k = 0; k < smesh.num_nodes(); ++k)
    phi[k] = smesh.nodes[k] + fsi::Vec2{d0[2 * k], d0[2 * k + 1]};
  for (auto _ : state)
    benchmark::DoNotOptimize(fsi::assemble_coupling_fluid(fmesh, smesh, phi));
}
BENCHMARK(BM_AssembleCoupling)->Arg(32)->Arg(64);

void BM_MonolithicStep(benchmark::State& state) {
  fsi::Scenario sc = desk_scenario(static_cast<int>(state.range(0)));
  fsi::SchemeConfig cfg;
  cfg.scheme = fsi::Scheme::Monolithic;
  cfg.tau = 0.01;
  fsi::FluidMesh fmesh = sc.make_fluid();
  fsi::SolidMesh smesh = sc.make_solid();
  std::vector<double> d0 = sc.initial_displacement(smesh);
  std::vector<double> v0(d0.size(), 0.0);
  for (auto _ : state) {
    fsi::CoupledState st = fsi::init_state(fmesh, smesh, d0, v0, {}, cfg.tau);
    fsi::Stepper stepper(fmesh, smesh, cfg, st);
    stepper.step();
    benchmark::DoNotOptimize(stepper.state().u);
  }
}
BENCHMARK(BM_MonolithicStep)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_TwoStageStep(benchmark::State& state) {
  fsi::Scenario sc = desk_scenario(static_cast<int>(state.range(0)));
  fsi::SchemeConfig cfg;
  cfg.scheme = fsi::Scheme::Alg3;
  cfg.extrapolation = 1;
  cfg.tau = 0.01;
  fsi::FluidMesh fmesh = sc.make_fluid();
  fsi::SolidMesh smesh = sc.make_solid();
  std::vector<double> d0 = sc.initial_displacement(smesh);
  std::vector<double> v0(d0.size(), 0.0);
  for (auto _ : state) {
    fsi::CoupledState st = fsi::init_state(fmesh, smesh, d0, v0, {}, cfg.tau);
    fsi::Stepper stepper(fmesh, smesh, cfg, st);
    stepper.step();
    benchmark::DoNotOptimize(stepper.state().u);
  }
}
BENCHMARK(BM_TwoStageStep)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_StructureSpectrum(benchmark::State& state) {
  fsi::Scenario sc = desk_scenario(64);
  fsi::SolidMesh smesh = sc.make_solid();
  fsi::SolidModel model;
  fsi::SolidBlocks blocks = fsi::assemble_solid_blocks(smesh, model);
  for (auto _ : state)
    benchmark::DoNotOptimize(fsi::generalized_eig_max(blocks.K_s, blocks.M_s));
}
BENCHMARK(BM_StructureSpectrum);

}  // namespace

BENCHMARK_MAIN();
