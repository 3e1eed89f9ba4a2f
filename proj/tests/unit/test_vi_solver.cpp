#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "../support/random_instances.hpp"
#include "vgs/vi_solver.hpp"

using namespace vgs;
using vgs::testing::RandomInstance;

namespace {

std::shared_ptr<const PolytopalMesh> share(PolytopalMesh m) { return std::make_shared<PolytopalMesh>(std::move(m)); }

// 4 x 2 quadrilaterals, Gamma3 along the bottom
PolytopalMesh strip() {
  std::mt19937 rng(1);
  return vgs::testing::jittered_grid(4, 2, 0.0, rng);
}

VIProblem strip_signorini() {
  VIProblem p;
  p.kind = ProblemKind::Signorini;
  p.sense = BarrierSense::Upper;
  p.diffusion = [](const Point&) { return Tensor::Identity(); };
  p.source = [](const Point& x) { return 30.0 * std::sin(2.0 * 3.14159265358979 * x.x()); };
  p.boundary = [](const Point& x) {
    if (x.y() < 1e-9) return Gamma::Gamma3;
    if (x.y() > 1 - 1e-9) return Gamma::Gamma1;
    return Gamma::Gamma2;
  };
  p.barrier = [](const Point&) { return 0.0; };
  return p;
}

VIProblem simple_obstacle(BarrierSense sense, double f, double g) {
  VIProblem p;
  p.kind = ProblemKind::Obstacle;
  p.sense = sense;
  p.diffusion = [](const Point&) { return Tensor::Identity(); };
  p.source = [f](const Point&) { return f; };
  p.barrier = [g](const Point&) { return g; };
  return p;
}

}  // namespace

TEST(Oracle, StripSignoriniMatchesEnumeration) {
  auto mesh = share(strip());
  ASSERT_EQ(mesh->num_cells(), 8u);
  HmmInstance hmm(mesh);
  const VIProblem p = strip_signorini();
  const auto qp = build_qp(p, hmm, problem_tags(p, *mesh));
  ASSERT_EQ(qp->constrained.size(), 4u);
  const VISolution s = solve_qp(qp);
  const VISolution o = oracle_solve(qp);
  EXPECT_LE(energy_distance(*qp, s.u, o.u), 1e-8);
  EXPECT_EQ(s.state.saturated, o.state.saturated);
  EXPECT_FALSE(s.state.saturated.empty());
  EXPECT_LT(s.state.saturated.size(), 4u);
  EXPECT_EQ(o.state.niter, 16u);
}

class RandomOracle : public ::testing::TestWithParam<int> {};

TEST_P(RandomOracle, SolverMatchesEnumeration) {
  std::mt19937 rng(1000 + static_cast<unsigned>(GetParam()));
  const Scheme scheme = GetParam() % 4 == 3 ? Scheme::P1 : Scheme::Hmm;
  RandomInstance r = GetParam() % 2 == 0 ? vgs::testing::random_obstacle(rng, scheme)
                                         : vgs::testing::random_signorini(rng, scheme);
  const auto qp = build_qp(r.problem, *r.disc, problem_tags(r.problem, *r.mesh));
  if (r.problem.kind == ProblemKind::Obstacle) {
    ASSERT_LE(qp->constrained.size(), 12u);
  } else {
    ASSERT_LE(qp->constrained.size(), 6u);
  }
  const VISolution s = solve_qp(qp);
  const VISolution o = oracle_solve(qp);
  EXPECT_LE(energy_distance(*qp, s.u, o.u), 1e-8) << r.label;
  EXPECT_LE(s.kkt.max(), 1e-9) << r.label;
  EXPECT_NEAR(s.energy, o.energy, 1e-10 * std::max(1.0, std::abs(o.energy))) << r.label;
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomOracle, ::testing::Range(0, 12));

TEST(Solver, LowerSenseIsTheMirrorOfUpperSense) {
  auto mesh = share(build_hexagonal_mesh(6));
  HmmInstance hmm(mesh);
  const VISolution up = solve_vi(hmm, simple_obstacle(BarrierSense::Upper, 30.0, 0.05));
  const VISolution lo = solve_vi(hmm, simple_obstacle(BarrierSense::Lower, -30.0, -0.05));
  EXPECT_LE((up.u + lo.u).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_EQ(up.state.saturated, lo.state.saturated);
  EXPECT_LE((up.multipliers - lo.multipliers).lpNorm<Eigen::Infinity>(), 1e-10);
  for (std::size_t k = 0; k < mesh->num_cells(); ++k) EXPECT_LE(up.u[static_cast<Eigen::Index>(k)], 0.05 + 1e-12);
}

TEST(Solver, MultipliersAndComplementarity) {
  auto mesh = share(build_triangular_mesh(6, TrianglePattern::CrissCross));
  for (Scheme scheme : {Scheme::Hmm, Scheme::P1}) {
    auto d = make_discretisation(scheme, mesh);
    const VISolution s = solve_vi(*d, simple_obstacle(BarrierSense::Upper, 40.0, 0.5));
    ASSERT_EQ(static_cast<std::size_t>(s.multipliers.size()), s.constrained.size());
    std::size_t active = 0;
    for (std::size_t i = 0; i < s.constrained.size(); ++i) {
      const double lam = s.multipliers[static_cast<Eigen::Index>(i)];
      const double gap = 0.5 - s.u[static_cast<Eigen::Index>(s.constrained[i])];
      EXPECT_GE(lam, -1e-9);
      EXPECT_GE(gap, -1e-12);
      EXPECT_LE(std::min(gap, lam), 1e-9);
      if (gap < 1e-12) ++active;
    }
    EXPECT_GT(active, 0u) << scheme_name(scheme);
    EXPECT_LT(active, s.constrained.size()) << scheme_name(scheme);
    EXPECT_LE(kkt_residuals(s).max(), 1e-9);
  }
}

TEST(Solver, HmmCellMultiplierIsTheFluxBalance) {
  auto mesh = share(build_hexagonal_mesh(6));
  HmmInstance hmm(mesh);
  const double f = 40.0;
  const VISolution s = solve_vi(hmm, simple_obstacle(BarrierSense::Upper, f, 0.03));
  for (std::size_t i = 0; i < s.constrained.size(); ++i) {
    const std::size_t k = s.constrained[i];
    const Eigen::VectorXd fl = fluxes(hmm, Tensor::Identity(), s.u, k);
    double out = 0.0;
    for (std::size_t j = 0; j < mesh->cell(k).faces.size(); ++j)
      out += mesh->face(mesh->cell(k).faces[j].face).measure * fl[static_cast<Eigen::Index>(j)];
    EXPECT_NEAR(s.multipliers[static_cast<Eigen::Index>(i)], mesh->cell(k).measure * f - out, 1e-10);
  }
}

TEST(Solver, SignoriniFaceMultiplierIsTheFlux) {
  auto mesh = share(build_hexagonal_mesh(6));
  HmmInstance hmm(mesh);
  const VIProblem p = strip_signorini();
  const VISolution s = solve_vi(hmm, p);
  for (std::size_t i = 0; i < s.constrained.size(); ++i) {
    const std::size_t face = s.constrained[i] - mesh->num_cells();
    const auto k = static_cast<std::size_t>(mesh->face(face).cells[0]);
    const Eigen::VectorXd fl = fluxes(hmm, Tensor::Identity(), s.u, k);
    for (std::size_t j = 0; j < mesh->cell(k).faces.size(); ++j)
      if (mesh->cell(k).faces[j].face == face) {
        EXPECT_NEAR(s.multipliers[static_cast<Eigen::Index>(i)], fl[static_cast<Eigen::Index>(j)], 1e-10);
      }
  }
  EXPECT_LE(s.kkt.flux_jump, 1e-9);
}

TEST(Solver, InactiveBarrierGivesTheLinearSolution) {
  auto mesh = share(build_hexagonal_mesh(5));
  HmmInstance hmm(mesh);
  VIProblem p = simple_obstacle(BarrierSense::Upper, 1.0, std::numeric_limits<double>::infinity());
  const VISolution s = solve_vi(hmm, p);
  EXPECT_TRUE(s.constrained.empty());
  EXPECT_EQ(s.state.niter, 1u);
  p.barrier = [](const Point&) { return 10.0; };
  const VISolution t = solve_vi(hmm, p);
  EXPECT_TRUE(t.state.saturated.empty());
  EXPECT_LE((s.u - t.u).lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(Solver, InadmissibleBarriersAreRejected) {
  auto mesh = share(build_triangular_mesh(3));
  HmmInstance hmm(mesh);
  VIProblem p = simple_obstacle(BarrierSense::Upper, 1.0, std::nan(""));
  EXPECT_THROW(solve_vi(hmm, p), SolverError);
  p.barrier = [](const Point&) { return -std::numeric_limits<double>::infinity(); };
  EXPECT_THROW(solve_vi(hmm, p), SolverError);
  p.sense = BarrierSense::Lower;
  p.barrier = [](const Point&) { return std::numeric_limits<double>::infinity(); };
  EXPECT_THROW(solve_vi(hmm, p), SolverError);
}

TEST(Solver, SignoriniNeedsDirichletPart) {
  auto mesh = share(build_triangular_mesh(3));
  HmmInstance hmm(mesh);
  VIProblem p = strip_signorini();
  p.boundary = [](const Point& x) { return x.y() < 1e-9 ? Gamma::Gamma3 : Gamma::Gamma2; };
  EXPECT_THROW(solve_vi(hmm, p), SolverError);
  EXPECT_THROW(solve_obstacle(hmm, strip_signorini()), SolverError);
  EXPECT_THROW(solve_signorini(hmm, simple_obstacle(BarrierSense::Upper, 1, 0)), SolverError);
}

TEST(Solver, MonotonePhaseOnlyGrowsTheSet) {
  auto mesh = share(build_triangular_mesh(8, TrianglePattern::CrissCross));
  HmmInstance hmm(mesh);
  const VISolution s = solve_vi(hmm, simple_obstacle(BarrierSense::Upper, 50.0, 0.02));
  ASSERT_GE(s.state.history.size(), 2u);
  EXPECT_EQ(s.state.history.front(), 0u);
  EXPECT_EQ(s.state.niter, s.state.history.size());
  if (s.state.phase == "monotone") {
    for (std::size_t i = 1; i < s.state.history.size(); ++i)
      EXPECT_GE(s.state.history[i], s.state.history[i - 1]);
  }
}

TEST(Solver, FullInitialSetReachesTheSameSolution) {
  auto mesh = share(build_hexagonal_mesh(6));
  HmmInstance hmm(mesh);
  const VIProblem p = simple_obstacle(BarrierSense::Lower, -30.0, -0.04);
  SolverOptions full;
  full.initial = InitialSet::Full;
  const VISolution a = solve_vi(hmm, p);
  const VISolution b = solve_vi(hmm, p, full);
  EXPECT_LE((a.u - b.u).lpNorm<Eigen::Infinity>(), 1e-11);
}

TEST(Solver, CapWithoutFallbackThrows) {
  auto mesh = share(build_triangular_mesh(8, TrianglePattern::CrissCross));
  HmmInstance hmm(mesh);
  SolverOptions opt;
  opt.max_iterations = 1;
  opt.allow_fallback = false;
  EXPECT_THROW(solve_vi(hmm, simple_obstacle(BarrierSense::Upper, 50.0, 0.02), opt), SolverError);
  opt.allow_fallback = true;
  EXPECT_NO_THROW(solve_vi(hmm, simple_obstacle(BarrierSense::Upper, 50.0, 0.02), opt));
}

TEST(Solver, NonHomogeneousDirichletData) {
  auto mesh = share(build_hexagonal_mesh(6));
  HmmInstance hmm(mesh);
  VIProblem p = simple_obstacle(BarrierSense::Upper, 0.0, 10.0);
  p.dirichlet = [](const Point& x) { return 1.0 + x.x() - 0.5 * x.y(); };
  const VISolution s = solve_vi(hmm, p);
  EXPECT_LE((s.u - hmm.interpolate(p.dirichlet)).lpNorm<Eigen::Infinity>(), 1e-10);
  // a binding obstacle below the boundary data
  p.barrier = [](const Point&) { return 1.2; };
  const VISolution t = solve_vi(hmm, p);
  EXPECT_FALSE(t.state.saturated.empty());
  for (std::size_t k = 0; k < mesh->num_cells(); ++k) EXPECT_LE(t.u[static_cast<Eigen::Index>(k)], 1.2 + 1e-12);
  EXPECT_LE(t.kkt.max(), 1e-9);
}

TEST(Solver, SolutionMinimisesEnergyOverFeasiblePerturbations) {
  auto mesh = share(build_hexagonal_mesh(5));
  HmmInstance hmm(mesh);
  const VIProblem p = simple_obstacle(BarrierSense::Upper, 30.0, 0.03);
  const auto qp = build_qp(p, hmm, problem_tags(p, *mesh));
  const VISolution s = solve_qp(qp);
  std::mt19937 rng(4);
  std::normal_distribution<double> nd(0.0, 1e-3);
  for (int trial = 0; trial < 50; ++trial) {
    DiscreteVector v = s.u;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (!qp->pinned[static_cast<std::size_t>(i)]) v[i] += nd(rng);
    for (std::size_t d : qp->constrained)
      v[static_cast<Eigen::Index>(d)] = std::min(v[static_cast<Eigen::Index>(d)], 0.03);
    EXPECT_GE(qp_energy(*qp, v), s.energy - 1e-14);
  }
}

TEST(Oracle, RejectsLargeProgrammes) {
  auto mesh = share(build_hexagonal_mesh(6));
  HmmInstance hmm(mesh);
  EXPECT_THROW(oracle_solve(hmm, simple_obstacle(BarrierSense::Upper, 1.0, 0.0)), SolverError);
}

TEST(Kkt, DetectsInfeasibleVectors) {
  auto mesh = share(build_triangular_mesh(3));
  HmmInstance hmm(mesh);
  const VIProblem p = simple_obstacle(BarrierSense::Upper, 30.0, 0.01);
  const auto qp = build_qp(p, hmm, problem_tags(p, *mesh));
  const VISolution s = solve_qp(qp);
  DiscreteVector bad = s.u;
  bad[0] += 0.5;
  EXPECT_GE(kkt_residuals(*qp, bad).feasibility, 0.49);
  EXPECT_GT(energy_distance(*qp, s.u, bad), 0.0);
  EXPECT_NEAR(kkt_residuals(*qp, s.u).max(), s.kkt.max(), 1e-15);
}
