#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "vgs/cases.hpp"

using namespace vgs;

TEST(Cases, ManufacturedCheckPassesForTest2) {
  const TestCase tc = test2_signorini_exact();
  const ManufacturedCheck c = manufactured_check(tc);
  EXPECT_TRUE(c.passed) << c.max_error;
  EXPECT_EQ(c.points, 40u);
}

TEST(Cases, ManufacturedCheckDetectsWrongSource) {
  TestCase tc = test2_signorini_exact();
  const ScalarFn f = tc.problem.source;
  tc.problem.source = [f](const Point& x) { return f(x) + 1e-3 * x.x(); };
  EXPECT_FALSE(manufactured_check(tc).passed);
  tc.problem.source = [f](const Point& x) { return -f(x); };
  EXPECT_FALSE(manufactured_check(tc).passed);
}

TEST(Cases, Test2InterfaceContinuity) {
  const TestCase tc = test2_signorini_exact();
  const ExactSolution& ex = *tc.problem.exact;
  for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    const Point below(x, 0.5 - 1e-13), at(x, 0.5);
    EXPECT_NEAR(ex.value(below), ex.value(at), 1e-10);
    EXPECT_NEAR(ex.flux(below).y(), ex.flux(at).y(), 1e-10);
  }
}

TEST(Cases, Test2ContactConditionsOnGamma3) {
  // u <= 0, flux . n <= 0 and their product vanishes along x = 0
  const ExactSolution& ex = *test2_signorini_exact().problem.exact;
  for (int i = 0; i <= 50; ++i) {
    const Point p(0.0, i / 50.0);
    const double u = ex.value(p);
    const double fn = -ex.flux(p).x();
    EXPECT_LE(u, 1e-12);
    EXPECT_LE(fn, 1e-12);
    EXPECT_NEAR(u * fn, 0.0, 1e-12);
  }
}

TEST(Cases, Parsing) {
  EXPECT_EQ(parse_family("hex"), MeshFamily::Hexagonal);
  EXPECT_EQ(parse_family("tri"), MeshFamily::Triangular);
  EXPECT_EQ(parse_family("kershaw"), MeshFamily::Kershaw);
  EXPECT_EQ(parse_scheme("hmm"), Scheme::Hmm);
  EXPECT_EQ(parse_scheme("p1"), Scheme::P1);
  EXPECT_THROW(parse_family("voronoi"), CaseError);
  EXPECT_THROW(parse_scheme("dg"), CaseError);
  EXPECT_THROW(make_case("test4"), CaseError);
}

TEST(Cases, Test3RejectsNonNegativeConstant) {
  EXPECT_THROW(test3_obstacle(0.0), CaseError);
  EXPECT_THROW(test3_obstacle(3.0), CaseError);
  EXPECT_THROW(test3_obstacle(std::nan("")), CaseError);
  EXPECT_NO_THROW(test3_obstacle(-1.0));
}

TEST(Cases, ResolutionIsEven) {
  for (MeshFamily f : {MeshFamily::Triangular, MeshFamily::Hexagonal, MeshFamily::Kershaw}) {
    for (double h : {0.3, 0.2, 0.13, 0.07, 0.05}) EXPECT_EQ(resolution_for(f, h) % 2, 0u);
  }
  const std::size_t n = resolution_for(MeshFamily::Triangular, 0.05);
  EXPECT_NEAR(build_family_mesh(MeshFamily::Triangular, n).size(), 0.05, 0.01);
}

TEST(Cases, ResolutionMatchesBruteForceSearch) {
  for (const auto& [family, h] : {std::pair{MeshFamily::Kershaw, 0.03}, std::pair{MeshFamily::Kershaw, 0.07},
                                  std::pair{MeshFamily::Hexagonal, 0.07}, std::pair{MeshFamily::Triangular, 0.03}}) {
    std::size_t best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t n = 2; n <= 120; n += 2) {
      const double err = std::abs(std::log(build_family_mesh(family, n).size() / h));
      if (err < best_err) {
        best_err = err;
        best = n;
      }
    }
    EXPECT_EQ(resolution_for(family, h), best) << family_name(family) << " h=" << h;
  }
}

TEST(Cases, Test1IterationCount) {
  const TestCase tc = test1_signorini();
  RunOptions opt;
  const std::size_t n = resolution_for(tc.family, 0.05);
  const CaseRun run = run_case(tc, n, opt);
  ASSERT_TRUE(run.record.niter.has_value());
  EXPECT_GE(*run.record.niter, 3u);
  EXPECT_LE(*run.record.niter, 8u);
  EXPECT_FALSE(run.record.failed);
}

TEST(Cases, Test3SolvesWithP1AndHmm) {
  const TestCase tc = test3_obstacle(-10.0);
  for (Scheme s : {Scheme::Hmm, Scheme::P1}) {
    RunOptions opt;
    opt.scheme = s;
    const CaseRun run = run_case(tc, 10, opt);
    EXPECT_FALSE(run.record.failed);
    EXPECT_LE(*run.record.niter, run.mesh->num_cells());
    EXPECT_GT(run.solution.state.saturated.size(), 0u);
  }
}

TEST(Cases, StudyIsDeterministic) {
  const TestCase tc = test2_signorini_exact();
  RunOptions opt;
  const std::vector<std::size_t> levels = study_resolutions(tc, 4, opt);
  ASSERT_EQ(levels.size(), 4u);
  const StudyResult a = run_convergence_study(tc, levels, opt);
  const StudyResult b = run_convergence_study(tc, levels, opt);
  ASSERT_EQ(a.report.records.size(), 4u);
  std::size_t with_order = 0;
  for (const auto& o : a.report.order_grad) with_order += o.has_value();
  EXPECT_EQ(with_order, 3u);
  EXPECT_TRUE(a.failures.empty());
  EXPECT_EQ(to_csv(a.report), to_csv(b.report));
  for (std::size_t i = 1; i < 4; ++i) EXPECT_LT(a.report.records[i].h, a.report.records[i - 1].h);
}

TEST(Cases, P1GradientOrderOnTest2) {
  const TestCase tc = test2_signorini_exact();
  RunOptions opt;
  opt.scheme = Scheme::P1;
  const StudyResult r = run_convergence_study(tc, {8, 16, 32}, opt);
  ASSERT_TRUE(r.report.order_grad.back().has_value());
  EXPECT_GE(*r.report.order_grad.back(), 0.9);
}

TEST(Cases, ErrorsDoNotDependOnQuadratureRefinement) {
  const TestCase tc = test2_signorini_exact();
  RunOptions opt;
  const CaseRun run = run_case(tc, 12, opt);
  const ExactSolution& ex = *tc.problem.exact;
  const L2Errors base = l2_errors(*run.disc, run.solution.u, ex.value, ex.gradient, 0);
  const L2Errors fine = l2_errors(*run.disc, run.solution.u, ex.value, ex.gradient, 1);
  EXPECT_LT(std::abs(fine.function / base.function - 1.0), 0.01);
  EXPECT_LT(std::abs(fine.gradient / base.gradient - 1.0), 0.01);
}

TEST(Cases, StudyRecordsFailedRows) {
  const TestCase tc = test3_obstacle(-20.0);
  RunOptions opt;
  opt.solver.max_iterations = 1;
  opt.solver.allow_fallback = false;
  const StudyResult r = run_convergence_study(tc, {8, 4}, opt);
  ASSERT_EQ(r.report.records.size(), 2u);
  EXPECT_TRUE(r.report.records[0].failed);
  EXPECT_TRUE(r.report.records[1].failed);
  EXPECT_EQ(r.failures.size(), 2u);
  EXPECT_NE(to_csv(r.report).find(",failed,"), std::string::npos);
}

TEST(Svg, ConstantFieldAndViewBox) {
  const PolytopalMesh mesh = build_hexagonal_mesh(3);
  const std::string svg = contour_svg(mesh, std::vector<double>(mesh.num_cells(), 1.5));
  EXPECT_NE(svg.find("viewBox=\"0 0 1 1\""), std::string::npos);
  EXPECT_NE(svg.find("min 1.5"), std::string::npos);
  EXPECT_NE(svg.find("max 1.5"), std::string::npos);
  std::size_t polygons = 0;
  for (std::size_t p = svg.find("<polygon"); p != std::string::npos; p = svg.find("<polygon", p + 1)) ++polygons;
  EXPECT_EQ(polygons, mesh.num_cells());
}

TEST(Svg, NanNamesTheCell) {
  const PolytopalMesh mesh = build_triangular_mesh(2);
  std::vector<double> field(mesh.num_cells(), 0.0);
  field[3] = std::nan("");
  try {
    (void)contour_svg(mesh, field);
    FAIL() << "expected CaseError";
  } catch (const CaseError& e) {
    EXPECT_NE(std::string(e.what()).find("cell 3"), std::string::npos);
  }
  EXPECT_THROW(contour_svg(mesh, std::vector<double>(2, 0.0)), CaseError);
}

TEST(Output, SolutionTextAndSvgFiles) {
  const TestCase tc = test3_obstacle(-10.0);
  RunOptions opt;
  opt.scheme = Scheme::P1;
  const CaseRun run = run_case(tc, 4, opt);
  const auto dir = std::filesystem::temp_directory_path() / "vgs_test_output";
  std::filesystem::create_directories(dir);
  write_solution_text(*run.disc, run.solution.u, dir / "u.txt");
  emit_contour_svg(*run.mesh, cell_values(*run.disc, run.solution.u), dir / "u.svg");
  std::ifstream in(dir / "u.txt");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    EXPECT_EQ(line.rfind("vertex ", 0), 0u);
  }
  EXPECT_EQ(lines, run.mesh->num_vertices());
  EXPECT_GT(std::filesystem::file_size(dir / "u.svg"), 0u);
  std::filesystem::remove_all(dir);
}
