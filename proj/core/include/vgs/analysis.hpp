#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vgs/gradient_disc.hpp"

namespace vgs {

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct L2Errors {
  double function = 0.0;  ///< relative unless function_absolute
  double gradient = 0.0;  ///< relative unless gradient_absolute
  double exact_function_norm = 0.0;
  double exact_gradient_norm = 0.0;
  bool function_absolute = false;
  bool gradient_absolute = false;
};

/// Relative L2 errors of Pi_D u and grad_D u against the exact fields,
/// integrated per sub-triangle with the degree-2 rule refined
/// `refine_levels` times (negative: read VGS_QUAD_REFINE).
L2Errors l2_errors(const Discretisation& disc, const DiscreteVector& u, const ScalarFn& value,
                   const VectorFn& gradient, int refine_levels = -1);

struct ConsistencyValue {
  double function = 0.0;  ///< ||Pi_D v - phi||
  double gradient = 0.0;  ///< ||grad_D v - grad phi||
  double total() const { return function + gradient; }
};

ConsistencyValue consistency_indicator(const Discretisation& disc, const ScalarFn& phi,
                                       const VectorFn& grad_phi, const DiscreteVector& v,
                                       int refine_levels = -1);

/// Functional v -> int grad_D v . psi + Pi_D v div psi - int_boundary psi.n T_D v,
/// with the degree-5 rules refined `refine_levels` times (negative: VGS_QUAD_REFINE).
DiscreteVector conformity_functional(const Discretisation& disc, const VectorFn& psi,
                                     const ScalarFn& div_psi, int refine_levels = -1);

/// W_D(psi): dual norm of the conformity functional on the space pinned by
/// `bc`, computed through a Riesz solve with the grad_D Gram matrix.
double limit_conformity_indicator(const Discretisation& disc, const BoundarySetup& bc,
                                  const VectorFn& psi, const ScalarFn& div_psi, int refine_levels = -1);

struct CoercivityEstimate {
  /// Obstacle: max ||Pi_D v|| / ||grad_D v||. With trace: an upper bound of
  /// max (||Pi_D v|| + ||T_D v||_boundary) / ||grad_D v||.
  double value = 0.0;
  double function_part = 0.0;  ///< max ||Pi_D v|| / ||grad_D v||
  double trace_part = 0.0;     ///< max ||T_D v|| / ||grad_D v|| (0 without trace)
  std::size_t iterations = 0;
  bool converged = true;
};

struct PowerIterationOptions {
  double rel_tol = 1e-6;
  std::size_t max_iterations = 500;
};

CoercivityEstimate coercivity_estimate(const Discretisation& disc, const BoundarySetup& bc,
                                       bool with_trace, const PowerIterationOptions& options = {});

struct DefectValue {
  double value = 0.0;
  double positive() const { return value > 0.0 ? value : 0.0; }
};

/// G_D = sum over the faces with `include(face)` of int psi.n (T_D v - u).
DefectValue boundary_defect(const Discretisation& disc, const VectorFn& flux, const ScalarFn& exact,
                            const DiscreteVector& v,
                            const std::function<bool(std::size_t)>& include = {});

/// E_D = int r (u - Pi_D v).
DefectValue interior_defect(const Discretisation& disc, const ScalarFn& residual,
                            const ScalarFn& exact, const DiscreteVector& v);

// ---------------------------------------------------------------------------

struct ErrorRecord {
  double h = 0.0;
  std::optional<double> err_fun;
  std::optional<double> err_grad;
  std::optional<std::size_t> niter;
  std::optional<double> wd;
  std::optional<double> cd;
  std::size_t constrained = 0;
  std::size_t cells = 0;
  bool failed = false;
  std::string note;
};

struct ConvergenceReport {
  std::vector<ErrorRecord> records;
  /// order_*[i] relates records i-1 and i; empty on the first row.
  std::vector<std::optional<double>> order_fun;
  std::vector<std::optional<double>> order_grad;
};

/// log(e_i / e_{i+1}) / log(h_i / h_{i+1}).
double observed_order(double e0, double e1, double h0, double h1);

/// Throws AnalysisError unless h is strictly decreasing.
ConvergenceReport orders(std::vector<ErrorRecord> records);

std::string to_csv(const ConvergenceReport& report);

/// Locale-independent shortest round-trip formatting.
std::string format_number(double v);

}  // namespace vgs
