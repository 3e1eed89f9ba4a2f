#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "vgs/gradient_disc.hpp"

namespace vgs {

using SparseMatrix = Eigen::SparseMatrix<double>;

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cellwise-constant symmetric positive definite diffusion tensors.
class DiffusionField {
 public:
  DiffusionField() = default;
  /// Throws AssemblyError if a tensor is not symmetric or has eigenvalues
  /// outside [lambda_min, lambda_max]. Bounds default to the observed range.
  explicit DiffusionField(std::vector<Tensor> tensors, std::optional<double> lambda_min = {},
                          std::optional<double> lambda_max = {});

  static DiffusionField constant(const PolytopalMesh& mesh, const Tensor& lambda);
  /// Samples Lambda at every cell centre x_K.
  static DiffusionField sampled(const PolytopalMesh& mesh, const TensorFn& lambda);

  const Tensor& operator[](std::size_t K) const { return tensors_[K]; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  std::size_t size() const { return tensors_.size(); }
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }

 private:
  std::vector<Tensor> tensors_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

struct LocalCellMatrix {
  std::size_t cell = 0;
  std::vector<std::size_t> dofs;
  Eigen::MatrixXd matrix;
};

/// HMM: |K| G^T Lambda G + R^T B R; P1: the stiffness of the triangle.
/// Rejects a non-SPD Lambda_K.
LocalCellMatrix local_matrix(const Discretisation& disc, const Tensor& lambda, std::size_t K);

/// F_K,sigma(u) = -a_K(u, e_sigma) / |sigma| for every face of K, in cell order.
Eigen::VectorXd fluxes(const HmmInstance& disc, const Tensor& lambda, const DiscreteVector& u,
                       std::size_t K);

/// Per-cell integrals of f: midpoint rule |K| f(x_K) when refine_levels < 0,
/// otherwise a composite degree-5 rule on the centre-face triangles.
Eigen::VectorXd load_vector(const PolytopalMesh& mesh, const ScalarFn& f, int refine_levels = -1);

/// Right-hand side in the dof space: HMM places the cell integrals on cell
/// unknowns; P1 integrates f against the hat functions.
DiscreteVector load_dofs(const Discretisation& disc, const ScalarFn& f);

SparseMatrix stiffness_matrix(const Discretisation& disc, const DiffusionField& lambda);

/// Equality-constrained linear system on the free unknowns.
struct SparseSpdSystem {
  SparseMatrix matrix;                ///< free block
  Eigen::VectorXd rhs;                ///< free rhs corrected by pinned values
  std::vector<std::size_t> retained;  ///< free index -> global unknown
  std::vector<char> pinned;           ///< global mask
  Eigen::VectorXd pinned_values;      ///< global vector, used where pinned
  /// Free unknowns whose block is diagonal and may be condensed (HMM cells).
  std::vector<char> condensable;
  std::size_t num_global() const { return pinned.size(); }
};

/// Removes pinned rows/columns symmetrically. Throws AssemblyError if a
/// connected block of free unknowns is not coupled to any pinned unknown and
/// `require_anchor` is set (the free block would be singular).
SparseSpdSystem restrict_system(const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                                const std::vector<char>& pinned,
                                const Eigen::VectorXd& pinned_values,
                                bool require_anchor = true);

SparseSpdSystem assemble(const Discretisation& disc, const DiffusionField& lambda,
                         const DiscreteVector& load, const std::vector<char>& pinned,
                         const Eigen::VectorXd* pinned_values = nullptr);

/// Marks free HMM cell unknowns as condensable.
void mark_condensable_cells(SparseSpdSystem& system, const Discretisation& disc);

enum class LinearMethod { Auto, Direct, ConjugateGradient };

struct LinearSolveOptions {
  LinearMethod method = LinearMethod::Auto;
  double residual_tol = 1e-10;
  double cg_tol = 1e-12;
  std::size_t direct_limit = 100000;  ///< Auto switches to CG above this size
  bool condense = false;
};

struct LinearSolveInfo {
  std::string method;
  double relative_residual = 0.0;
  std::size_t iterations = 0;
};

/// Solves the system and returns the full global vector (pinned values
/// included). Throws SolveError when the factorisation fails or the
/// relative residual exceeds options.residual_tol.
DiscreteVector solve_spd(const SparseSpdSystem& system, const LinearSolveOptions& options = {},
                         LinearSolveInfo* info = nullptr);

}  // namespace vgs
