// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../support/random_instances.hpp"
#include "vgs/analysis.hpp"
#include "vgs/assembly.hpp"
#include "vgs/cases.hpp"

using namespace vgs;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

int failures = 0;

void report(const char* id, const std::string& title, bool pass, const std::string& detail) {
  std::printf("%s %s %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

// worst KKT residual over every converged solve of the suite
struct KktLog {
  double worst = 0.0;
  std::size_t solves = 0;
  std::string worst_where;
  void add(const KktResiduals& k, const std::string& where) {
    const double m = std::isnan(k.max()) ? std::numeric_limits<double>::infinity() : k.max();
    if (solves++ == 0 || m > worst) {
      worst = m;
      worst_where = where;
    }
  }
} kkt_log;

void log_study(const StudyResult& r, const std::string& where) {
  for (std::size_t i = 0; i < r.kkt.size(); ++i) {
    if (!r.report.records[i].failed) kkt_log.add(r.kkt[i], where + " h=" + fmt(r.report.records[i].h));
  }
}

// ---------------------------------------------------------------------------

void ac1_oracle() {
  const auto t0 = Clock::now();
  std::mt19937 rng(20240);
  std::size_t count = 0, nontrivial = 0, max_cells = 0, max_contact = 0;
  double worst = 0.0;
  std::string worst_label;
  bool ok = true;
  for (int rep = 0; rep < 8; ++rep) {
    for (Scheme s : {Scheme::Hmm, Scheme::P1}) {
      for (int kind = 0; kind < 2; ++kind) {
        testing::RandomInstance inst = kind == 0 ? testing::random_obstacle(rng, s) : testing::random_signorini(rng, s);
        const VISolution a = solve_vi(*inst.disc, inst.problem);
        const VISolution b = oracle_solve(a.qp);
        const double d = energy_distance(*a.qp, a.u, b.u);
        kkt_log.add(a.kkt, inst.label);
        ++count;
        const std::size_t m = a.constrained.size();
        if (kind == 0) {
          max_cells = std::max(max_cells, inst.mesh->num_cells());
        } else {
          max_contact = std::max(max_contact, m);
        }
        const std::size_t active = a.state.saturated.size();
        if (active > 0 && active < m) ++nontrivial;
        if (!(d <= 1e-8)) ok = false;
        if (!(d <= worst)) {
          worst = std::max(worst, std::isnan(d) ? std::numeric_limits<double>::infinity() : d);
          worst_label = inst.label;
        }
      }
    }
  }
  const double t = seconds_since(t0);
  const bool sizes = max_cells <= 12 && max_contact <= 6;
  report("AC1", "oracle equivalence", ok && sizes && count >= 25 && t < 30.0,
         std::to_string(count) + " instances (" + std::to_string(nontrivial) + " with partially active sets, " +
             std::to_string(max_cells) + " obstacle cells and " + std::to_string(max_contact) +
             " contact unknowns at most), max energy distance " + fmt(worst) + " [" + worst_label + "], " + fmt(t) +
             " s");
}

// ---------------------------------------------------------------------------

void ac2_test2_convergence() {
  const auto t0 = Clock::now();
  const TestCase tc = test2_signorini_exact();
  RunOptions opt;
  const std::vector<std::size_t> levels = study_resolutions(tc, 4, opt);
  const StudyResult r = run_convergence_study(tc, levels, opt);
  log_study(r, "test2 hex");
  const double t = seconds_since(t0);

  const double reference_fun[] = {0.6858, 0.2531, 0.1355, 0.0758};
  const double reference_grad[] = {0.4360, 0.2038, 0.1041, 0.0542};
  bool ok = r.failures.empty() && r.report.records.size() == 4;
  std::ostringstream os;
  double worst_ratio = 1.0;
  if (ok) {
    for (std::size_t i = 0; i < 4; ++i) {
      const ErrorRecord& rec = r.report.records[i];
      for (const auto& [ours, ref] : {std::pair{*rec.err_fun, reference_fun[i]}, std::pair{*rec.err_grad, reference_grad[i]}}) {
        const double ratio = std::max(ours / ref, ref / ours);
        worst_ratio = std::max(worst_ratio, ratio);
        if (!(ratio <= 2.5)) ok = false;
      }
      os << "h=" << fmt(rec.h) << " fun=" << fmt(*rec.err_fun) << " grad=" << fmt(*rec.err_grad) << "; ";
    }
    for (std::size_t i = 2; i < 4; ++i) {
      const double of = *r.report.order_fun[i], og = *r.report.order_grad[i];
      os << "orders[" << i << "] fun=" << fmt(of) << " grad=" << fmt(og) << "; ";
      if (!(of >= 0.75) || !(og >= 0.85)) ok = false;
    }
  }
  os << "worst ratio to reference errors " << fmt(worst_ratio) << ", " << fmt(t) << " s";
  report("AC2", "Test 2 convergence on hexagons", ok && t < 300.0, os.str());
}

// ---------------------------------------------------------------------------

void ac3_iterations() {
  std::ostringstream os;
  bool ok = true;
  {
    const TestCase tc = test1_signorini();
    RunOptions opt;
    const StudyResult r = run_convergence_study(tc, study_resolutions(tc, 4, opt), opt);
    log_study(r, "test1");
    os << "test1 niter";
    for (const ErrorRecord& rec : r.report.records) {
      if (rec.failed) {
        ok = false;
        os << " failed";
        continue;
      }
      os << ' ' << *rec.niter << "/" << rec.constrained;
      if (*rec.niter > rec.constrained) ok = false;
      if (rec.h >= 0.0156 * (1 - 1e-9) && *rec.niter > 9) ok = false;
    }
    if (!r.report.records.empty() && r.report.records.back().h < 0.0156 * (1 - 1e-9)) {
      os << " (finest h " << fmt(r.report.records.back().h) << ")";
    }
  }
  {
    const TestCase tc = test3_obstacle(-20.0);
    RunOptions opt;
    const StudyResult r = run_convergence_study(tc, study_resolutions(tc, 4, opt), opt);
    log_study(r, "test3 C=-20");
    os << "; test3 niter";
    for (const ErrorRecord& rec : r.report.records) {
      if (rec.failed) {
        ok = false;
        os << " failed";
        continue;
      }
      os << ' ' << *rec.niter << "/" << rec.cells;
      if (*rec.niter > rec.cells) ok = false;
    }
  }
  {
    std::vector<std::size_t> counts;
    os << "; test3 h=0.05 niter over C=-5,-10,-15,-20:";
    for (double C : {-5.0, -10.0, -15.0, -20.0}) {
      const TestCase tc = test3_obstacle(C);
      RunOptions opt;
      const CaseRun run = run_case(tc, resolution_for(tc.family, 0.05), opt);
      if (run.record.failed) {
        ok = false;
        os << " failed";
        continue;
      }
      kkt_log.add(run.solution.kkt, "test3 C=" + fmt(C));
      counts.push_back(*run.record.niter);
      os << ' ' << counts.back();
    }
    std::size_t inversions = 0;
    for (std::size_t i = 1; i < counts.size(); ++i) inversions += counts[i] > counts[i - 1];
    if (inversions > 1) ok = false;
  }
  report("AC3", "iteration counts", ok, os.str());
}

// ---------------------------------------------------------------------------

struct AffineCase {
  std::string label;
  std::shared_ptr<const PolytopalMesh> mesh;
};

std::vector<AffineCase> affine_meshes() {
  std::mt19937 rng(7);
  auto share = [](PolytopalMesh m) { return std::make_shared<const PolytopalMesh>(std::move(m)); };
  return {
      {"tri-diagonal", share(build_triangular_mesh(8, TrianglePattern::Diagonal))},
      {"tri-crisscross", share(build_triangular_mesh(6, TrianglePattern::CrissCross))},
      {"hexagonal", share(build_hexagonal_mesh(8))},
      {"distorted", share(build_distorted_quad_mesh(10, 0.6))},
      {"jittered", share(testing::jittered_grid(7, 6, 0.3, rng))},
  };
}

bool is_triangular(const PolytopalMesh& m) {
  for (std::size_t k = 0; k < m.num_cells(); ++k) {
    if (m.cell(k).vertices.size() != 3) return false;
  }
  return true;
}

void ac5_affine() {
  Tensor lambda;
  lambda << 2.0, 0.5, 0.5, 1.0;
  // lambda * (2, -1) is horizontal, so the flux vanishes through y = const
  const ScalarFn u = [](const Point& x) { return 1.0 + 2.0 * x.x() - x.y(); };
  const VectorFn g = [](const Point&) { return Point(2.0, -1.0); };
  double worst = 0.0;
  std::string worst_where;
  std::size_t runs = 0;
  for (const AffineCase& mc : affine_meshes()) {
    std::vector<Scheme> schemes{Scheme::Hmm};
    if (is_triangular(*mc.mesh)) schemes.push_back(Scheme::P1);
    for (Scheme s : schemes) {
      const auto disc = make_discretisation(s, mc.mesh);
      for (int variant = 0; variant < 2; ++variant) {
        VIProblem p;
        p.diffusion = [lambda](const Point&) { return lambda; };
        p.source = [](const Point&) { return 0.0; };
        p.dirichlet = u;
        p.sense = BarrierSense::Upper;
        p.exact = ExactSolution{u, g, [lambda, g](const Point& x) { return Point(lambda * g(x)); },
                                [](const Point&) { return 0.0; }};
        std::string label = mc.label + " " + scheme_name(s);
        if (variant == 0) {
          p.kind = ProblemKind::Obstacle;
          p.barrier = [](const Point&) { return std::numeric_limits<double>::infinity(); };
          label += " obstacle";
        } else {
          p.kind = ProblemKind::Signorini;
          p.boundary = [](const Point& x) {
            if (x.y() < 1e-9) return Gamma::Gamma3;
            if (x.y() > 1.0 - 1e-9) return Gamma::Gamma2;
            return Gamma::Gamma1;
          };
          p.barrier = [](const Point&) { return 10.0; };
          label += " signorini";
        }
        const VISolution sol = solve_vi(*disc, p);
        kkt_log.add(sol.kkt, "affine " + label);
        const L2Errors e = l2_errors(*disc, sol.u, u, g, 0);
        ++runs;
        if (!(e.gradient <= worst)) {
          worst = std::isnan(e.gradient) ? std::numeric_limits<double>::infinity() : e.gradient;
          worst_where = label;
        }
      }
    }
  }
  report("AC5", "affine exactness", worst <= 1e-10,
         std::to_string(runs) + " solves, max relative gradient error " + fmt(worst) + " [" + worst_where + "]");
}

// ---------------------------------------------------------------------------

struct RandomField {
  VectorFn psi;
  ScalarFn div;
};

RandomField random_field(std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double a0 = n(rng), a1 = n(rng), a2 = n(rng), a3 = n(rng);
  const double b0 = n(rng), b1 = n(rng), b2 = n(rng), b3 = n(rng);
  RandomField f;
  f.psi = [=](const Point& x) {
    return Point(a0 + a1 * x.x() * x.y() + a2 * std::sin(3.0 * x.x() + 1.0) + a3 * std::exp(x.y()),
                 b0 + b1 * x.x() * x.x() + b2 * std::cos(2.0 * x.y()) + b3 * x.y() * x.y() * x.y());
  };
  f.div = [=](const Point& x) {
    return a1 * x.y() + 3.0 * a2 * std::cos(3.0 * x.x() + 1.0) - 2.0 * b2 * std::sin(2.0 * x.y()) +
           3.0 * b3 * x.y() * x.y();
  };
  return f;
}

void ac6_indicators() {
  std::ostringstream os;
  bool ok = true;

  // P1 limit conformity on the triangular meshes used by the tests
  {
    std::mt19937 rng(99);
    double worst = 0.0;
    std::size_t evaluations = 0;
    const TestCase t2 = test2_signorini_exact();
    const TestCase t3 = test3_obstacle(-20.0);
    RunOptions p1;
    p1.scheme = Scheme::P1;
    for (const TestCase* tc : {&t2, &t3}) {
      for (std::size_t n : study_resolutions(*tc, 4, p1)) {
        auto mesh = std::make_shared<const PolytopalMesh>(build_family_mesh(MeshFamily::Triangular, n));
        P1Instance disc(mesh);
        const BoundaryTags tags = problem_tags(tc->problem, *mesh);
        const BoundarySetup bc{&tags};
        for (int i = 0; i < 5; ++i) {
          const RandomField f = random_field(rng);
          worst = std::max(worst, limit_conformity_indicator(disc, bc, f.psi, f.div, 2));
          ++evaluations;
        }
      }
    }
    os << "P1 W_D max " << fmt(worst) << " over " << evaluations << " fields";
    if (!(worst <= 1e-8)) ok = false;
  }

  // HMM indicators on the Test 2 hexagonal family
  {
    const TestCase tc = test2_signorini_exact();
    RunOptions opt;
    const ExactSolution& ex = *tc.problem.exact;
    const ScalarFn f = tc.problem.source;
    const ScalarFn div_flux = [f](const Point& x) { return -f(x); };
    std::vector<double> wd, cd;
    double g_test2 = 0.0, e_test2 = 0.0;
    for (std::size_t n : study_resolutions(tc, 4, opt)) {
      auto mesh = std::make_shared<const PolytopalMesh>(build_family_mesh(MeshFamily::Hexagonal, n));
      HmmInstance disc(mesh);
      const BoundaryTags tags = problem_tags(tc.problem, *mesh);
      const BoundarySetup bc{&tags};
      wd.push_back(limit_conformity_indicator(disc, bc, ex.flux, div_flux));
      cd.push_back(coercivity_estimate(disc, bc, true).value);
      const DiscreteVector v = disc.interpolate(ex.value);
      g_test2 = std::max(g_test2, std::abs(boundary_defect(disc, ex.flux, ex.value, v,
                                                           [&](std::size_t s) { return tags[s] == Gamma::Gamma3; })
                                               .value));
      e_test2 = std::max(e_test2, std::abs(interior_defect(disc, ex.residual, ex.value, v).value));
    }
    os << "; HMM W_D";
    for (std::size_t i = 0; i < wd.size(); ++i) {
      os << ' ' << fmt(wd[i]);
      if (i > 0 && !(wd[i] / wd[i - 1] <= 0.7)) ok = false;
    }
    const auto [lo, hi] = std::minmax_element(cd.begin(), cd.end());
    const double variation = *hi / *lo - 1.0;
    os << "; C_D";
    for (double c : cd) os << ' ' << fmt(c);
    os << " (variation " << fmt(100.0 * variation) << "%)";
    if (!(variation <= 0.1)) ok = false;
    os << "; Test 2 |G_D|,|E_D| <= " << fmt(std::max(g_test2, e_test2));
  }

  // defect orders for smooth data with a contact part on y = 0
  {
    const ScalarFn u = [](const Point& x) { return std::sin(3.0 * x.x()) * std::cos(x.y()) + x.y() * x.y(); };
    const VectorFn grad = [](const Point& x) {
      return Point(3.0 * std::cos(3.0 * x.x()) * std::cos(x.y()),
                   -std::sin(3.0 * x.x()) * std::sin(x.y()) + 2.0 * x.y());
    };
    const VectorFn flux = [grad](const Point& x) { return Point(grad(x) + Point(0.0, 1.0 + x.x())); };
    const ScalarFn residual = [](const Point& x) { return 1.0 + x.x() * x.y(); };
    double min_order = std::numeric_limits<double>::infinity();
    for (Scheme s : {Scheme::Hmm, Scheme::P1}) {
      double pg = 0.0, pe = 0.0, ph = 0.0;
      for (std::size_t n : {8, 16, 32}) {
        auto mesh = std::make_shared<const PolytopalMesh>(build_family_mesh(MeshFamily::Triangular, n));
        const auto disc = make_discretisation(s, mesh);
        const DiscreteVector v = disc->interpolate(u);
        const double g =
            std::abs(boundary_defect(*disc, flux, u, v, [&](std::size_t f) { return mesh->face(f).centroid.y() < 1e-9; })
                         .value);
        const double e = std::abs(interior_defect(*disc, residual, u, v).value);
        if (ph > 0.0) {
          min_order = std::min({min_order, observed_order(pg, g, ph, mesh->size()),
                                observed_order(pe, e, ph, mesh->size())});
        }
        pg = g;
        pe = e;
        ph = mesh->size();
      }
    }
    os << "; smooth-data defect order min " << fmt(min_order);
    if (!(min_order >= 1.7)) ok = false;
  }
  report("AC6", "indicators", ok, os.str());
}

// ---------------------------------------------------------------------------

void ac7_distorted() {
  const TestCase tc = test2_signorini_exact();
  RunOptions opt;
  opt.family = MeshFamily::Kershaw;
  opt.amplitude = 0.6;
  // the reference distorted-mesh run has 34 faces on Gamma3; n faces lie on x = 0 here
  constexpr std::size_t n = 34;
  const CaseRun run = run_case(tc, n, opt);
  bool ok = !run.record.failed && run.record.err_grad.has_value();
  std::ostringstream os;
  os << "n=" << n << " (" << run.tags.count(Gamma::Gamma3) << " faces on Gamma3) h=" << fmt(run.record.h);
  if (ok) {
    kkt_log.add(run.solution.kkt, "test2 distorted n=34");
    const double kkt = run.solution.kkt.max();
    os << " kkt=" << fmt(kkt) << " grad error " << fmt(*run.record.err_grad) << " fun error "
       << fmt(*run.record.err_fun);
    if (!(kkt <= 1e-9) || !(*run.record.err_grad <= 0.05)) ok = false;
  } else {
    os << " solve failed: " << run.record.note;
  }
  // context only: the same family at the finest Test 2 mesh size
  const std::size_t fine = resolution_for(MeshFamily::Kershaw, tc.reference_h.back(), 0.6);
  const CaseRun finer = run_case(tc, fine, opt);
  if (!finer.record.failed && finer.record.err_grad) {
    kkt_log.add(finer.solution.kkt, "test2 distorted n=" + std::to_string(fine));
    os << "; at n=" << fine << " h=" << fmt(finer.record.h) << " grad error " << fmt(*finer.record.err_grad);
  }
  report("AC7", "Test 2 on distorted quadrilaterals", ok, os.str());
}

void ac4_kkt() {
  report("AC4", "KKT residuals", kkt_log.worst <= 1e-9 && kkt_log.solves > 0,
         std::to_string(kkt_log.solves) + " solves, worst residual " + fmt(kkt_log.worst) + " [" +
             kkt_log.worst_where + "]");
}

// which phase of the active-set solver produced each solution of Tests 1-3
void phase_tally() {
  std::size_t monotone = 0, pdas = 0, primal = 0;
  for (const char* name : {"test1", "test2", "test3"}) {
    const TestCase tc = make_case(name);
    for (Scheme s : {Scheme::Hmm, Scheme::P1}) {
      RunOptions opt;
      opt.scheme = s;
      for (std::size_t n : study_resolutions(tc, 4, opt)) {
        const std::string& phase = run_case(tc, n, opt).solution.state.phase;
        monotone += phase == "monotone";
        pdas += phase == "pdas";
        primal += phase == "primal";
      }
    }
  }
  std::printf("INFO solver phases over Tests 1-3, HMM and P1: monotone %zu, pdas %zu, primal %zu\n", monotone, pdas,
              primal);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const std::vector<std::pair<const char*, std::function<void()>>> checks = {
      {"AC1", ac1_oracle},     {"AC2", ac2_test2_convergence}, {"AC3", ac3_iterations},
      {"AC5", ac5_affine},     {"AC6", ac6_indicators},        {"AC7", ac7_distorted},
  };
  for (const auto& [id, run] : checks) {
    try {
      run();
    } catch (const std::exception& e) {
      report(id, "aborted", false, e.what());
    }
  }
  // collects the solves of every other criterion
  ac4_kkt();
  try {
    phase_tally();
  } catch (const std::exception& e) {
    std::printf("INFO solver phase tally aborted: %s\n", e.what());
  }
  std::printf("%d criteria failed, %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
