#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vgs/analysis.hpp"
#include "vgs/gradient_disc.hpp"
#include "vgs/mesh.hpp"
#include "vgs/vi_solver.hpp"

namespace vgs {

class CaseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MeshFamily { Triangular, Hexagonal, Kershaw };

const char* family_name(MeshFamily f);
MeshFamily parse_family(const std::string& name);
Scheme parse_scheme(const std::string& name);

/// Criss-cross triangles, hexagons, or the sheared quadrilaterals.
PolytopalMesh build_family_mesh(MeshFamily family, std::size_t n, double amplitude = 0.6);

/// Even resolution whose mesh size is closest to `h`.
std::size_t resolution_for(MeshFamily family, double h, double amplitude = 0.6);

/// Part of the domain on which the closed-form data are smooth.
struct Subdomain {
  double x0, x1, y0, y1;
};

struct TestCase {
  std::string name;
  VIProblem problem;
  MeshFamily family = MeshFamily::Triangular;
  std::vector<double> reference_h;
  std::vector<Subdomain> subdomains;  ///< for the manufactured check
  /// Interface drawn on solution plots.
  std::vector<Point> overlay;
};

TestCase test1_signorini();
TestCase test2_signorini_exact();
/// f = C with C < 0; throws CaseError otherwise.
TestCase test3_obstacle(double C);
TestCase make_case(const std::string& name, double C = -20.0);

struct ManufacturedCheck {
  double max_error = 0.0;  ///< max |div(flux) + f - residual| / max(1, |f|)
  std::size_t points = 0;
  bool passed = true;
};

/// Compares f with -div(Lambda grad u) by fourth-order finite differences of
/// the exact flux at `points` random points per subdomain.
ManufacturedCheck manufactured_check(const TestCase& tc, std::size_t points = 20, double tol = 1e-8,
                                     unsigned seed = 2024);

// ---------------------------------------------------------------------------

struct CaseRun {
  std::shared_ptr<const PolytopalMesh> mesh;
  std::unique_ptr<Discretisation> disc;
  BoundaryTags tags;
  VISolution solution;
  ErrorRecord record;
  std::optional<L2Errors> errors;
};

struct RunOptions {
  Scheme scheme = Scheme::Hmm;
  std::optional<MeshFamily> family;  ///< default: the case's, triangles for P1
  double amplitude = 0.6;
  bool indicators = false;
  SolverOptions solver;
};

MeshFamily effective_family(const TestCase& tc, const RunOptions& options);

/// Builds the mesh at resolution n, solves, and fills the error record.
CaseRun run_case(const TestCase& tc, std::size_t n, const RunOptions& options);

struct StudyResult {
  ConvergenceReport report;
  std::vector<KktResiduals> kkt;
  std::vector<std::string> failures;
};

/// One row per resolution (any order; rows are sorted by decreasing h).
/// Solver failures are recorded as failed rows and the study continues.
StudyResult run_convergence_study(const TestCase& tc, const std::vector<std::size_t>& resolutions,
                                  const RunOptions& options);

/// First `levels` resolutions matching the case's reference mesh sizes;
/// further levels halve h.
std::vector<std::size_t> study_resolutions(const TestCase& tc, std::size_t levels, const RunOptions& options);

// ---------------------------------------------------------------------------

/// One value per cell: u_K for HMM, the vertex mean for P1.
std::vector<double> cell_values(const Discretisation& disc, const DiscreteVector& u);

/// Per-cell polygons coloured by a linear map, min/max legend and an
/// optional polyline overlay. Throws CaseError naming the first NaN cell.
void emit_contour_svg(const PolytopalMesh& mesh, const std::vector<double>& field,
                      const std::filesystem::path& path, const std::vector<Point>& overlay = {});
std::string contour_svg(const PolytopalMesh& mesh, const std::vector<double>& field,
                        const std::vector<Point>& overlay = {});

/// `kind id value` lines (cell/face for HMM, vertex for P1).
void write_solution_text(const Discretisation& disc, const DiscreteVector& u,
                         const std::filesystem::path& path);

}  // namespace vgs
