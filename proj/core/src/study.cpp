#include <algorithm>
#include <fstream>
#include <locale>
#include <sstream>

#include "vgs/cases.hpp"

namespace vgs {

MeshFamily effective_family(const TestCase& tc, const RunOptions& options) {
  if (options.family) return *options.family;
  if (options.scheme == Scheme::P1) return MeshFamily::Triangular;
  return tc.family;
}

CaseRun run_case(const TestCase& tc, std::size_t n, const RunOptions& options) {
  const ManufacturedCheck mc = manufactured_check(tc);
  if (!mc.passed) {
    throw CaseError(tc.name + ": manufactured identity fails (max error " + format_number(mc.max_error) + ")");
  }
  CaseRun run;
  const MeshFamily family = effective_family(tc, options);
  auto mesh = std::make_shared<PolytopalMesh>(build_family_mesh(family, n, options.amplitude));
  require_valid(*mesh, ValidationOptions{1e-12, 1e-10, 1.0});
  run.mesh = mesh;
  run.disc = make_discretisation(options.scheme, run.mesh);
  run.tags = problem_tags(tc.problem, *run.mesh);
  run.record.h = run.mesh->size();
  run.record.cells = run.mesh->num_cells();

  auto qp = build_qp(tc.problem, *run.disc, run.tags);
  run.record.constrained = qp->constrained.size();
  run.solution = solve_qp(qp, options.solver);
  run.record.niter = run.solution.state.niter;

  const auto& ex = tc.problem.exact;
  if (ex && ex->value && ex->gradient) {
    run.errors = l2_errors(*run.disc, run.solution.u, ex->value, ex->gradient);
    run.record.err_fun = run.errors->function;
    run.record.err_grad = run.errors->gradient;
  }
  if (options.indicators) {
    const BoundarySetup bc{&run.tags};
    if (ex && ex->flux) {
      const ScalarFn source = tc.problem.source;
      const ScalarFn residual = ex->residual;
      run.record.wd = limit_conformity_indicator(
          *run.disc, bc, ex->flux,
          [source, residual](const Point& x) { return (residual ? residual(x) : 0.0) - source(x); });
    }
    run.record.cd = coercivity_estimate(*run.disc, bc, tc.problem.kind == ProblemKind::Signorini).value;
  }
  return run;
}

StudyResult run_convergence_study(const TestCase& tc, const std::vector<std::size_t>& resolutions,
                                  const RunOptions& options) {
  StudyResult out;
  std::vector<std::pair<ErrorRecord, KktResiduals>> rows;
  for (std::size_t n : resolutions) {
    try {
      CaseRun run = run_case(tc, n, options);
      rows.emplace_back(run.record, run.solution.kkt);
    } catch (const std::exception& e) {
      ErrorRecord rec;
      try {
        rec.h = build_family_mesh(effective_family(tc, options), n, options.amplitude).size();
      } catch (const std::exception&) {
        rec.h = 1.0 / static_cast<double>(n);
      }
      rec.failed = true;
      rec.note = e.what();
      out.failures.push_back("n=" + std::to_string(n) + ": " + e.what());
      rows.emplace_back(rec, KktResiduals{});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first.h > b.first.h; });
  std::vector<ErrorRecord> records;
  for (auto& r : rows) {
    records.push_back(r.first);
    out.kkt.push_back(r.second);
  }
  out.report = orders(std::move(records));
  return out;
}

std::vector<std::size_t> study_resolutions(const TestCase& tc, std::size_t levels, const RunOptions& options) {
  const MeshFamily family = effective_family(tc, options);
  std::vector<double> targets;
  for (std::size_t i = 0; i < levels; ++i) {
    if (i < tc.reference_h.size()) {
      targets.push_back(tc.reference_h[i]);
    } else {
      targets.push_back(0.5 * targets.back());
    }
  }
  std::vector<std::size_t> out;
  for (double h : targets) {
    std::size_t n = resolution_for(family, h, options.amplitude);
    if (!out.empty() && n <= out.back()) n = out.back() + 1;
    out.push_back(n);
  }
  return out;
}

std::vector<double> cell_values(const Discretisation& disc, const DiscreteVector& u) {
  const PolytopalMesh& mesh = disc.mesh();
  std::vector<double> out(mesh.num_cells());
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    if (disc.scheme() == Scheme::Hmm) {
      out[k] = u[static_cast<Eigen::Index>(k)];
    } else {
      double s = 0.0;
      for (std::size_t v : mesh.cell(k).vertices) s += u[static_cast<Eigen::Index>(v)];
      out[k] = s / static_cast<double>(mesh.cell(k).vertices.size());
    }
  }
  return out;
}

void write_solution_text(const Discretisation& disc, const DiscreteVector& u, const std::filesystem::path& path) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  const std::size_t nc = disc.mesh().num_cells();
  for (std::size_t i = 0; i < disc.num_dofs(); ++i) {
    const double v = u[static_cast<Eigen::Index>(i)];
    if (disc.scheme() == Scheme::P1) {
      os << "vertex " << i;
    } else if (i < nc) {
      os << "cell " << i;
    } else {
      os << "face " << (i - nc);
    }
    os << ' ' << format_number(v) << '\n';
  }
  std::ofstream out(path);
  if (!out) throw CaseError("cannot write " + path.string());
  out << os.str();
  if (!out) throw CaseError("write failed for " + path.string());
}

}  // namespace vgs
