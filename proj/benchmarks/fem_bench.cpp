#include <benchmark/benchmark.h>

#include "meso/dns/solvers.hpp"
#include "meso/fem/assembly.hpp"

using namespace meso;

static void BM_AssembleStiffness(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto mesh = fem::StructuredMesh::rectangle(n, n, 1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(fem::assemble_stiffness(mesh));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(mesh.element_count()));
}
BENCHMARK(BM_AssembleStiffness)->Arg(33)->Arg(65)->Arg(129);

static void BM_DiffusionResidual(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto mesh = fem::StructuredMesh::rectangle(n, n, 1.0, 1.0);
  fem::BoundaryMask mask(mesh.node_count());
  for (auto node : fem::side_nodes(mesh, 0)) mask.set_dirichlet(node, 1.0);
  const auto c = dns::solve_steady_diffusion(mesh, mask, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(fem::bulk_residual_diffusion(c, mesh, mask, 1.0));
}
BENCHMARK(BM_DiffusionResidual)->Arg(33)->Arg(129);

static void BM_AllenCahnSolve(benchmark::State& state) {
  dns::AllenCahnParams p;
  p.steps = static_cast<std::size_t>(state.range(0));
  const auto phi0 = dns::allen_cahn_initial_condition(p, 1);
  for (auto _ : state) benchmark::DoNotOptimize(dns::solve_allen_cahn_1d(p, phi0));
}
BENCHMARK(BM_AllenCahnSolve)->Arg(300)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
