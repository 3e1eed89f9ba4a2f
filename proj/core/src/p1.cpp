#include "vgs/gradient_disc.hpp"

#include <Eigen/LU>

namespace vgs {

P1Instance::P1Instance(std::shared_ptr<const PolytopalMesh> mesh) : Discretisation(std::move(mesh)) {
  const PolytopalMesh& m = *mesh_;
  num_dofs_ = m.num_vertices();
  shape_.resize(m.num_cells());
  for (std::size_t k = 0; k < m.num_cells(); ++k) {
    const Cell& cell = m.cell(k);
    if (cell.vertices.size() != 3) {
      throw DiscretisationError("P1 requires a triangular mesh; cell " + std::to_string(k) +
                                " has " + std::to_string(cell.vertices.size()) + " vertices");
    }
    const Point& p0 = m.vertex(cell.vertices[0]);
    const Point& p1 = m.vertex(cell.vertices[1]);
    const Point& p2 = m.vertex(cell.vertices[2]);
    Eigen::Matrix2d jac;
    jac.col(0) = p1 - p0;
    jac.col(1) = p2 - p0;
    const Eigen::Matrix2d inv_t = jac.inverse().transpose();
    Eigen::Matrix<double, 2, 3> g;
    g.col(1) = inv_t.col(0);
    g.col(2) = inv_t.col(1);
    g.col(0) = -g.col(1) - g.col(2);
    shape_[k] = g;

    SubTriangle piece;
    piece.cell = k;
    piece.vertices = {p0, p1, p2};
    piece.area = cell.measure;
    piece.dofs = cell_dofs(k);
    piece.function = Eigen::MatrixXd::Identity(3, 3);
    piece.gradient = g;
    pieces_.push_back(std::move(piece));
  }
  finalise_pieces();

  for (std::size_t f : m.boundary_faces()) {
    const Face& face = m.face(f);
    BoundaryPiece b;
    b.face = f;
    b.ends = {m.vertex(face.vertices[0]), m.vertex(face.vertices[1])};
    b.length = face.measure;
    for (const auto& cf : m.cell(static_cast<std::size_t>(face.cells[0])).faces)
      if (cf.face == f) b.normal = cf.normal;
    b.dofs = {face.vertices[0], face.vertices[1]};
    b.weights = Eigen::MatrixXd::Identity(2, 2);
    boundary_pieces_.push_back(std::move(b));
  }
}

std::vector<std::size_t> P1Instance::cell_dofs(std::size_t K) const { return mesh_->cell(K).vertices; }

Point P1Instance::dof_point(std::size_t dof) const { return mesh_->vertex(dof); }

std::vector<char> P1Instance::pinned_mask(const BoundarySetup& bc) const {
  std::vector<char> mask(num_dofs_, 0);
  for (std::size_t f : mesh_->boundary_faces()) {
    if (!bc.face_pinned(f)) continue;
    mask[mesh_->face(f).vertices[0]] = 1;
    mask[mesh_->face(f).vertices[1]] = 1;
  }
  return mask;
}

std::vector<std::size_t> P1Instance::obstacle_dofs(const BoundarySetup& bc) const {
  const auto mask = pinned_mask(bc);
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < num_dofs_; ++v)
    if (!mask[v]) out.push_back(v);
  return out;
}

std::vector<std::size_t> P1Instance::contact_dofs(const BoundarySetup& bc) const {
  const auto mask = pinned_mask(bc);
  std::vector<char> on(num_dofs_, 0);
  for (std::size_t f : mesh_->boundary_faces()) {
    if (!bc.face_contact(f)) continue;
    on[mesh_->face(f).vertices[0]] = 1;
    on[mesh_->face(f).vertices[1]] = 1;
  }
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < num_dofs_; ++v)
    if (on[v] && !mask[v]) out.push_back(v);
  return out;
}

}  // namespace vgs
