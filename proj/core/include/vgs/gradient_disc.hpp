#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "vgs/mesh.hpp"

namespace vgs {

using ScalarFn = std::function<double(const Point&)>;
using VectorFn = std::function<Point(const Point&)>;
using TensorFn = std::function<Tensor(const Point&)>;

/// Degrees of freedom of a discretisation. HMM: cells first (index K), then
/// faces (index num_cells + sigma). P1: one value per mesh vertex.
using DiscreteVector = Eigen::VectorXd;

enum class Scheme { Hmm, P1 };

const char* scheme_name(Scheme s);

class DiscretisationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Triangle on which Pi_D v is affine and grad_D v is constant. For HMM these
/// are the pyramids co({sigma, x_K}); for P1 the mesh triangles.
struct SubTriangle {
  std::size_t cell = 0;
  std::size_t face = 0;  ///< HMM: base face; P1: unused
  std::array<Point, 3> vertices;
  double area = 0.0;
  std::vector<std::size_t> dofs;
  /// Row i gives the values of Pi_D(e_{dofs[i]}) at the three vertices.
  Eigen::MatrixXd function;
  /// Column i is grad_D(e_{dofs[i]}) on the triangle.
  Eigen::Matrix<double, 2, Eigen::Dynamic> gradient;
};

/// Boundary face on which T_D v is affine.
struct BoundaryPiece {
  std::size_t face = 0;
  std::array<Point, 2> ends;
  double length = 0.0;
  Point normal = Point::Zero();  ///< outward unit normal
  std::vector<std::size_t> dofs;
  /// Row i gives the values of T_D(e_{dofs[i]}) at the two end points.
  Eigen::MatrixXd weights;
};

/// Which boundary unknowns are Dirichlet-pinned: all boundary faces for the
/// obstacle problem, the Gamma1 faces for Signorini.
struct BoundarySetup {
  const BoundaryTags* tags = nullptr;  ///< nullptr: whole boundary is Dirichlet

  bool face_pinned(std::size_t face) const;
  bool face_contact(std::size_t face) const;
};

/// Gradient discretisation (X_D, Pi_D, grad_D, T_D) over a polytopal mesh.
class Discretisation {
 public:
  virtual ~Discretisation() = default;

  virtual Scheme scheme() const = 0;
  const PolytopalMesh& mesh() const { return *mesh_; }
  std::size_t num_dofs() const { return num_dofs_; }

  const std::vector<SubTriangle>& pieces() const { return pieces_; }
  /// Index range [first, last) of the pieces lying in cell K.
  std::pair<std::size_t, std::size_t> pieces_of_cell(std::size_t K) const {
    return {cell_piece_offset_[K], cell_piece_offset_[K + 1]};
  }
  /// One piece per boundary face, in the order of mesh().boundary_faces().
  const std::vector<BoundaryPiece>& boundary_pieces() const { return boundary_pieces_; }

  /// Local unknowns of cell K, in the order used by local matrices.
  virtual std::vector<std::size_t> cell_dofs(std::size_t K) const = 0;

  /// Point at which an unknown is sampled (x_K, face centroid or vertex).
  virtual Point dof_point(std::size_t dof) const = 0;

  /// Nodal interpolant (HMM: u(x_K), u(centroid); P1: vertex values).
  DiscreteVector interpolate(const ScalarFn& u) const;

  /// Dirichlet-pinned unknowns.
  virtual std::vector<char> pinned_mask(const BoundarySetup& bc) const = 0;
  /// Unknowns carrying the obstacle constraint (HMM: cells, P1: free vertices).
  virtual std::vector<std::size_t> obstacle_dofs(const BoundarySetup& bc) const = 0;
  /// Unknowns carrying the contact constraint on Gamma3.
  virtual std::vector<std::size_t> contact_dofs(const BoundarySetup& bc) const = 0;

  /// Gram matrix of the pieces: sum over sub-triangles of |T| g^T Lambda g.
  /// Lambda is taken from the cell of each piece.
  std::vector<Eigen::MatrixXd> piecewise_gram(const std::vector<Tensor>& lambda) const;

 protected:
  explicit Discretisation(std::shared_ptr<const PolytopalMesh> mesh) : mesh_(std::move(mesh)) {}
  void finalise_pieces();

  std::shared_ptr<const PolytopalMesh> mesh_;
  std::size_t num_dofs_ = 0;
  std::vector<SubTriangle> pieces_;
  std::vector<std::size_t> cell_piece_offset_;
  std::vector<BoundaryPiece> boundary_pieces_;
};

/// Hybrid mimetic mixed discretisation with the hybrid finite volume
/// stabilisation B_K = beta diag(|sigma| (Lambda_K n.n) / d_K,sigma).
class HmmInstance final : public Discretisation {
 public:
  explicit HmmInstance(std::shared_ptr<const PolytopalMesh> mesh, double beta = 1.0);

  Scheme scheme() const override { return Scheme::Hmm; }
  double beta() const { return beta_; }

  std::size_t cell_dof(std::size_t K) const { return K; }
  std::size_t face_dof(std::size_t sigma) const { return mesh_->num_cells() + sigma; }

  std::vector<std::size_t> cell_dofs(std::size_t K) const override;
  Point dof_point(std::size_t dof) const override;
  std::vector<char> pinned_mask(const BoundarySetup& bc) const override;
  std::vector<std::size_t> obstacle_dofs(const BoundarySetup& bc) const override;
  std::vector<std::size_t> contact_dofs(const BoundarySetup& bc) const override;

  /// 2 x (1 + Card(E_K)) matrix mapping local unknowns to grad_K v.
  const Eigen::Matrix<double, 2, Eigen::Dynamic>& gradient_matrix(std::size_t K) const {
    return gradient_[K];
  }
  /// Card(E_K) x (1 + Card(E_K)) matrix mapping local unknowns to R_K(v).
  const Eigen::MatrixXd& residual_matrix(std::size_t K) const { return residual_[K]; }
  /// Diagonal of B_K for the given Lambda_K.
  Eigen::VectorXd stabilisation(std::size_t K, const Tensor& lambda) const;

  Eigen::VectorXd local_values(const DiscreteVector& v, std::size_t K) const;
  Point cell_gradient(const DiscreteVector& v, std::size_t K) const;
  Eigen::VectorXd stabilization_residual(const DiscreteVector& v, std::size_t K) const;

 private:
  double beta_;
  std::vector<Eigen::Matrix<double, 2, Eigen::Dynamic>> gradient_;
  std::vector<Eigen::MatrixXd> residual_;
};

/// Conforming P1 finite elements; only triangular meshes are accepted.
class P1Instance final : public Discretisation {
 public:
  explicit P1Instance(std::shared_ptr<const PolytopalMesh> mesh);

  Scheme scheme() const override { return Scheme::P1; }

  std::vector<std::size_t> cell_dofs(std::size_t K) const override;
  Point dof_point(std::size_t dof) const override;
  std::vector<char> pinned_mask(const BoundarySetup& bc) const override;
  std::vector<std::size_t> obstacle_dofs(const BoundarySetup& bc) const override;
  std::vector<std::size_t> contact_dofs(const BoundarySetup& bc) const override;

  /// Columns are the gradients of the three hat functions of cell K.
  const Eigen::Matrix<double, 2, 3>& shape_gradients(std::size_t K) const { return shape_[K]; }

 private:
  std::vector<Eigen::Matrix<double, 2, 3>> shape_;
};

std::unique_ptr<Discretisation> make_discretisation(Scheme scheme,
                                                    std::shared_ptr<const PolytopalMesh> mesh);

/// Evaluable view of Pi_D v, grad_D v and T_D v.
class PiecewiseField {
 public:
  PiecewiseField(const Discretisation& disc, DiscreteVector values);

  const Discretisation& discretisation() const { return *disc_; }
  const DiscreteVector& values() const { return values_; }

  double value_on(std::size_t piece, const std::array<double, 3>& bary) const;
  Point gradient_on(std::size_t piece) const;
  double trace_on(std::size_t boundary_piece, double t) const;

  /// Pi_D v at x (linear search over pieces; throws outside the domain).
  double value(const Point& x) const;
  Point gradient(const Point& x) const;

 private:
  std::size_t locate(const Point& x) const;

  const Discretisation* disc_;
  DiscreteVector values_;
};

PiecewiseField reconstruct_function(const Discretisation& disc, const DiscreteVector& v);
PiecewiseField reconstruct_gradient(const Discretisation& disc, const DiscreteVector& v);
PiecewiseField reconstruct_trace(const Discretisation& disc, const DiscreteVector& v);

}  // namespace vgs
