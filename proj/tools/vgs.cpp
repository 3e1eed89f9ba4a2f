#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vgs/cases.hpp"

namespace fs = std::filesystem;
using namespace vgs;

namespace {

struct CommonArgs {
  std::string case_name = "test2";
  std::string scheme = "hmm";
  std::string family;
  double C = -20.0;
  double amp = 0.6;
  double tol = 1e-9;
  std::string out = ".";
};

void add_common(CLI::App* app, CommonArgs& a) {
  app->add_option("--case", a.case_name, "test1, test2 or test3")->check(CLI::IsMember({"test1", "test2", "test3"}));
  app->add_option("--scheme", a.scheme, "hmm or p1")->check(CLI::IsMember({"hmm", "p1"}));
  app->add_option("--family", a.family, "mesh family override: tri, hex or kershaw")
      ->check(CLI::IsMember({"tri", "hex", "kershaw"}));
  app->add_option("--C", a.C, "source constant of test3 (negative)");
  app->add_option("--amp", a.amp, "distortion amplitude of the kershaw family");
  app->add_option("--tol", a.tol, "KKT tolerance");
  app->add_option("--out", a.out, "output directory");
}

RunOptions run_options(const CommonArgs& a) {
  RunOptions opt;
  opt.scheme = parse_scheme(a.scheme);
  if (!a.family.empty()) opt.family = parse_family(a.family);
  opt.amplitude = a.amp;
  opt.solver.tol = a.tol;
  return opt;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw CaseError("cannot write " + path.string());
  out << text;
  if (!out) throw CaseError("write failed for " + path.string());
}

int run_solve(const CommonArgs& a, std::optional<double> h, std::optional<std::size_t> n, bool indicators) {
  const TestCase tc = make_case(a.case_name, a.C);
  RunOptions opt = run_options(a);
  opt.indicators = indicators;
  const MeshFamily family = effective_family(tc, opt);
  const std::size_t res = n ? *n : resolution_for(family, h.value_or(tc.reference_h.at(1)), opt.amplitude);

  CaseRun run = run_case(tc, res, opt);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_text(dir / "report.csv", to_csv(orders({run.record})));
  emit_contour_svg(*run.mesh, cell_values(*run.disc, run.solution.u), dir / "solution.svg", tc.overlay);
  write_solution_text(*run.disc, run.solution.u, dir / "solution.txt");

  const KktResiduals& k = run.solution.kkt;
  std::cout << tc.name << " " << a.scheme << " " << family_name(family) << " n=" << res
            << " h=" << format_number(run.record.h) << " cells=" << run.record.cells
            << " constrained=" << run.record.constrained << " niter=" << run.solution.state.niter
            << " phase=" << run.solution.state.phase << "\n";
  if (run.errors) {
    std::cout << "err_fun=" << format_number(run.errors->function)
              << " err_grad=" << format_number(run.errors->gradient) << "\n";
  }
  std::cout << "kkt feasibility=" << format_number(k.feasibility) << " sign=" << format_number(k.multiplier_sign)
            << " complementarity=" << format_number(k.complementarity)
            << " flux_jump=" << format_number(k.flux_jump) << " balance=" << format_number(k.balance) << "\n";
  const bool ok = k.max() <= a.tol;
  std::cout << (ok ? "PASS" : "FAIL") << " kkt <= " << format_number(a.tol) << "\n";
  return ok ? 0 : 1;
}

int run_study(const CommonArgs& a, std::size_t levels, bool indicators) {
  const TestCase tc = make_case(a.case_name, a.C);
  RunOptions opt = run_options(a);
  opt.indicators = indicators;
  const auto resolutions = study_resolutions(tc, levels, opt);
  const StudyResult res = run_convergence_study(tc, resolutions, opt);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  const std::string csv = to_csv(res.report);
  write_text(dir / "report.csv", csv);
  std::cout << csv;

  // plot the finest successful level
  for (auto it = resolutions.rbegin(); it != resolutions.rend(); ++it) {
    try {
      CaseRun run = run_case(tc, *it, RunOptions{opt.scheme, opt.family, opt.amplitude, false, opt.solver});
      emit_contour_svg(*run.mesh, cell_values(*run.disc, run.solution.u), dir / "solution.svg", tc.overlay);
      write_solution_text(*run.disc, run.solution.u, dir / "solution.txt");
      break;
    } catch (const std::exception&) {
      continue;
    }
  }

  bool ok = res.failures.empty();
  for (const std::string& f : res.failures) std::cout << "failed " << f << "\n";
  for (const KktResiduals& k : res.kkt) ok = ok && k.max() <= a.tol;
  std::cout << (ok ? "PASS" : "FAIL") << " all levels solved with kkt <= " << format_number(a.tol) << "\n";
  return ok ? 0 : 1;
}

int run_mesh(const std::string& family, std::size_t n, double amp, const std::string& out) {
  const PolytopalMesh mesh = build_family_mesh(parse_family(family), n, amp);
  std::ofstream file(out);
  if (!file) throw CaseError("cannot write " + out);
  write_mesh(file, mesh);
  if (!file) throw CaseError("write failed for " + out);
  std::cout << family << " n=" << n << " cells=" << mesh.num_cells() << " faces=" << mesh.num_faces()
            << " h=" << format_number(mesh.size()) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Obstacle and Signorini problems with HMM and P1 gradient schemes"};
  app.require_subcommand(1);

  CommonArgs solve_args;
  std::optional<double> solve_h;
  std::optional<std::size_t> solve_n;
  bool solve_indicators = false;
  CLI::App* solve = app.add_subcommand("solve", "solve one case on one mesh");
  solve->set_help_flag("--help", "print this help and exit");
  add_common(solve, solve_args);
  solve->add_option("--h", solve_h, "target mesh size");
  solve->add_option("--n", solve_n, "mesh resolution (overrides --h)");
  solve->add_flag("--indicators", solve_indicators, "compute W_D and C_D");

  CommonArgs study_args;
  std::size_t levels = 4;
  bool study_indicators = false;
  CLI::App* study = app.add_subcommand("study", "convergence study over refined meshes");
  add_common(study, study_args);
  study->add_option("--levels", levels, "number of meshes")->check(CLI::Range(1, 12));
  study->add_flag("--indicators", study_indicators, "compute W_D and C_D");

  std::string mesh_family = "hex";
  std::size_t mesh_n = 8;
  double mesh_amp = 0.6;
  std::string mesh_out;
  CLI::App* mesh = app.add_subcommand("mesh", "write a generated mesh");
  mesh->add_option("--family", mesh_family, "tri, hex or kershaw")->check(CLI::IsMember({"tri", "hex", "kershaw"}));
  mesh->add_option("--n", mesh_n, "resolution")->check(CLI::PositiveNumber);
  mesh->add_option("--amp", mesh_amp, "distortion amplitude");
  mesh->add_option("--out", mesh_out, "output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return run_solve(solve_args, solve_h, solve_n, solve_indicators);
    if (*study) return run_study(study_args, levels, study_indicators);
    if (*mesh) return run_mesh(mesh_family, mesh_n, mesh_amp, mesh_out);
  } catch (const std::exception& e) {
    std::cerr << "vgs: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
