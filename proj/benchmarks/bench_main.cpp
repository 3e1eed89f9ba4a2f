#include <benchmark/benchmark.h>

#include <memory>

#include "vgs/cases.hpp"

namespace {

using namespace vgs;

void BM_HexagonalMesh(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    PolytopalMesh m = build_hexagonal_mesh(n);
    benchmark::DoNotOptimize(m.num_cells());
  }
}
BENCHMARK(BM_HexagonalMesh)->Arg(12)->Arg(24)->Arg(48);

void BM_HmmStiffness(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto mesh = std::make_shared<PolytopalMesh>(build_hexagonal_mesh(n));
  auto disc = make_discretisation(Scheme::Hmm, mesh);
  const DiffusionField lambda = DiffusionField::constant(*mesh, Tensor::Identity());
  for (auto _ : state) {
    SparseMatrix a = stiffness_matrix(*disc, lambda);
    benchmark::DoNotOptimize(a.nonZeros());
  }
}
BENCHMARK(BM_HmmStiffness)->Arg(12)->Arg(24)->Arg(48);

void BM_Test2Solve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const TestCase tc = test2_signorini_exact();
  auto mesh = std::make_shared<PolytopalMesh>(build_hexagonal_mesh(n));
  auto disc = make_discretisation(Scheme::Hmm, mesh);
  const BoundaryTags tags = problem_tags(tc.problem, *mesh);
  auto qp = build_qp(tc.problem, *disc, tags);
  for (auto _ : state) {
    VISolution s = solve_qp(qp, SolverOptions{});
    benchmark::DoNotOptimize(s.energy);
  }
}
BENCHMARK(BM_Test2Solve)->Arg(12)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_Test3Solve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const TestCase tc = test3_obstacle(-20.0);
  auto mesh = std::make_shared<PolytopalMesh>(build_triangular_mesh(n, TrianglePattern::CrissCross));
  auto disc = make_discretisation(Scheme::Hmm, mesh);
  const BoundaryTags tags = problem_tags(tc.problem, *mesh);
  auto qp = build_qp(tc.problem, *disc, tags);
  for (auto _ : state) {
    VISolution s = solve_qp(qp, SolverOptions{});
    benchmark::DoNotOptimize(s.energy);
  }
}
BENCHMARK(BM_Test3Solve)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
