#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vgs/assembly.hpp"
#include "vgs/gradient_disc.hpp"
#include "vgs/mesh.hpp"

namespace vgs {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ProblemKind { Obstacle, Signorini };
enum class BarrierSense { Upper, Lower };

/// Closed-form solution data used by error studies and diagnostics.
struct ExactSolution {
  ScalarFn value;
  VectorFn gradient;
  /// Lambda grad u (normal component on the boundary gives the flux).
  VectorFn flux;
  /// div(Lambda grad u) + f; identically zero off the contact set.
  ScalarFn residual;
};

struct VIProblem {
  std::string name;
  ProblemKind kind = ProblemKind::Obstacle;
  TensorFn diffusion;  ///< sampled at the cell centres
  ScalarFn source;
  /// Signorini boundary partition; ignored for the obstacle problem.
  BoundaryClassifier boundary;
  /// a on Gamma3 (Signorini) or g in Omega (obstacle). +infinity disables
  /// the constraint at a point.
  ScalarFn barrier;
  BarrierSense sense = BarrierSense::Upper;
  /// Values on the Dirichlet part; homogeneous when empty.
  ScalarFn dirichlet;
  std::optional<ExactSolution> exact;
};

/// Barrier samples at the constrained unknowns, in the problem's own sense.
struct DiscreteBarrier {
  ProblemKind kind = ProblemKind::Obstacle;
  BarrierSense sense = BarrierSense::Upper;
  std::vector<std::size_t> dofs;
  Eigen::VectorXd values;
};

/// Boundary tags of `problem` on `mesh` (all Gamma1 for the obstacle problem).
BoundaryTags problem_tags(const VIProblem& problem, const PolytopalMesh& mesh);

/// a_sigma = a(centroid) on Gamma3 faces, g_K = g(x_K) on cells (HMM) or
/// vertex values (P1). Throws SolverError on NaN or -infinity samples.
DiscreteBarrier discretise_barrier(const VIProblem& problem, const Discretisation& disc,
                                   const BoundaryTags& tags);

/// Quadratic programme min 1/2 w^T A w - b^T w over w <= c on the constrained
/// unknowns, with Dirichlet unknowns pinned. Lower-sense problems are stored
/// after the substitution w = -u, which makes every constraint an upper bound.
struct QpContext {
  const Discretisation* disc = nullptr;
  ProblemKind kind = ProblemKind::Obstacle;
  double sign = 1.0;  ///< u = sign * w
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  std::vector<char> pinned;
  Eigen::VectorXd pinned_values;  ///< in w
  std::vector<std::size_t> constrained;
  Eigen::VectorXd bound;  ///< c, in w; +inf where unconstrained
  /// Multiplier scaling per constrained unknown (1/|sigma| on HMM faces).
  Eigen::VectorXd multiplier_scale;
  /// Unknowns whose balance row must vanish (free and not constrained).
  std::vector<std::size_t> balance_rows;
  /// HMM interior faces, for the flux-conservation check.
  std::vector<std::size_t> interior_face_rows;
  std::vector<double> interior_face_measure;
};

std::shared_ptr<QpContext> build_qp(const VIProblem& problem, const Discretisation& disc,
                                    const BoundaryTags& tags);

enum class InitialSet { Empty, Full };

struct SolverOptions {
  double tol = 1e-9;
  double tie_tol = 1e-12;
  InitialSet initial = InitialSet::Empty;
  /// Cap on linear solves of the monotone phase; 0 means #constrained + 1.
  std::size_t max_iterations = 0;
  bool allow_fallback = true;
  LinearSolveOptions linear;
};

struct ActiveSetState {
  std::vector<std::size_t> saturated;  ///< global unknowns pinned to the barrier
  std::size_t niter = 0;               ///< number of linear solves
  std::vector<std::size_t> history;    ///< saturated-set size per solve
  std::string phase = "monotone";      ///< monotone, pdas or primal
};

struct KktResiduals {
  double feasibility = 0.0;       ///< max (u - barrier)^+ in the Upper convention
  double multiplier_sign = 0.0;   ///< max (-lambda)^+
  double complementarity = 0.0;   ///< max |min(barrier - u, lambda)|
  double flux_jump = 0.0;         ///< max |F_K + F_L| on interior faces (HMM)
  double balance = 0.0;           ///< max residual of unconstrained free rows
  double max() const;
};

struct VISolution {
  DiscreteVector u;  ///< in the problem's own sign
  std::vector<std::size_t> constrained;
  /// Upper-convention multipliers, nonnegative at a solution: cells
  /// |K| f_K - sum |sigma| F_K,sigma, contact faces F_K,sigma; P1: nodal
  /// residuals.
  Eigen::VectorXd multipliers;
  ActiveSetState state;
  KktResiduals kkt;
  double energy = 0.0;
  std::shared_ptr<const QpContext> qp;
};

VISolution solve_qp(std::shared_ptr<const QpContext> qp, const SolverOptions& options = {});

VISolution solve_obstacle(const Discretisation& disc, const VIProblem& problem,
                          const SolverOptions& options = {});
VISolution solve_signorini(const Discretisation& disc, const VIProblem& problem,
                           const SolverOptions& options = {});
/// Dispatches on problem.kind.
VISolution solve_vi(const Discretisation& disc, const VIProblem& problem,
                    const SolverOptions& options = {});

/// Residuals of u (given in the problem's own sign) for the programme `qp`.
KktResiduals kkt_residuals(const QpContext& qp, const DiscreteVector& u);
KktResiduals kkt_residuals(const VISolution& solution);

/// Energy 1/2 w^T A w - b^T w of u (problem sign).
double qp_energy(const QpContext& qp, const DiscreteVector& u);
/// sqrt((u - v)^T A (u - v)).
double energy_distance(const QpContext& qp, const DiscreteVector& u, const DiscreteVector& v);

/// Exhaustive enumeration of active sets with dense solves. At most 20
/// constrained unknowns.
VISolution oracle_solve(std::shared_ptr<const QpContext> qp, double tol = 1e-9);
VISolution oracle_solve(const Discretisation& disc, const VIProblem& problem, double tol = 1e-9);

}  // namespace vgs
