#include <cmath>

#include "vgs/gradient_disc.hpp"

namespace vgs {

HmmInstance::HmmInstance(std::shared_ptr<const PolytopalMesh> mesh, double beta)
    : Discretisation(std::move(mesh)), beta_(beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DiscretisationError("HMM stabilisation scaling must be positive");
  }
  const PolytopalMesh& m = *mesh_;
  num_dofs_ = m.num_cells() + m.num_faces();
  gradient_.resize(m.num_cells());
  residual_.resize(m.num_cells());
  const double sqrt_d = std::sqrt(2.0);

  for (std::size_t k = 0; k < m.num_cells(); ++k) {
    const Cell& cell = m.cell(k);
    const auto nf = static_cast<Eigen::Index>(cell.faces.size());
    Eigen::Matrix<double, 2, Eigen::Dynamic> g = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, nf + 1);
    for (Eigen::Index j = 0; j < nf; ++j) {
      const CellFace& cf = cell.faces[static_cast<std::size_t>(j)];
      const Point w = m.face(cf.face).measure / cell.measure * cf.normal;
      g.col(j + 1) += w;
      g.col(0) -= w;
    }
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(nf, nf + 1);
    for (Eigen::Index j = 0; j < nf; ++j) {
      const CellFace& cf = cell.faces[static_cast<std::size_t>(j)];
      const Point dx = m.face(cf.face).centroid - cell.centre;
      r(j, j + 1) += 1.0;
      r(j, 0) -= 1.0;
      r.row(j) -= dx.transpose() * g;
    }

    for (Eigen::Index j = 0; j < nf; ++j) {
      const CellFace& cf = cell.faces[static_cast<std::size_t>(j)];
      const Face& face = m.face(cf.face);
      SubTriangle piece;
      piece.cell = k;
      piece.face = cf.face;
      const std::size_t a = cell.vertices[static_cast<std::size_t>(j)];
      const std::size_t b = cell.vertices[(static_cast<std::size_t>(j) + 1) % cell.vertices.size()];
      piece.vertices = {cell.centre, m.vertex(a), m.vertex(b)};
      piece.area = 0.5 * face.measure * cf.distance;
      piece.dofs = cell_dofs(k);
      piece.function = Eigen::MatrixXd::Zero(nf + 1, 3);
      piece.function.row(0).setOnes();
      piece.gradient = g;
      const double c = std::sqrt(beta_) * sqrt_d / cf.distance;
      piece.gradient += c * cf.normal * r.row(j);
      pieces_.push_back(std::move(piece));
    }
    gradient_[k] = std::move(g);
    residual_[k] = std::move(r);
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
    b.dofs = {face_dof(f)};
    b.weights = Eigen::MatrixXd::Ones(1, 2);
    boundary_pieces_.push_back(std::move(b));
  }
}

std::vector<std::size_t> HmmInstance::cell_dofs(std::size_t K) const {
  const Cell& cell = mesh_->cell(K);
  std::vector<std::size_t> dofs;
  dofs.reserve(cell.faces.size() + 1);
  dofs.push_back(cell_dof(K));
  for (const auto& cf : cell.faces) dofs.push_back(face_dof(cf.face));
  return dofs;
}

Point HmmInstance::dof_point(std::size_t dof) const {
  if (dof < mesh_->num_cells()) return mesh_->cell(dof).centre;
  return mesh_->face(dof - mesh_->num_cells()).centroid;
}

std::vector<char> HmmInstance::pinned_mask(const BoundarySetup& bc) const {
  std::vector<char> mask(num_dofs_, 0);
  for (std::size_t f : mesh_->boundary_faces())
    if (bc.face_pinned(f)) mask[face_dof(f)] = 1;
  return mask;
}

std::vector<std::size_t> HmmInstance::obstacle_dofs(const BoundarySetup&) const {
  std::vector<std::size_t> out(mesh_->num_cells());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = cell_dof(k);
  return out;
}

std::vector<std::size_t> HmmInstance::contact_dofs(const BoundarySetup& bc) const {
  std::vector<std::size_t> out;
  for (std::size_t f : mesh_->boundary_faces())
    if (bc.face_contact(f)) out.push_back(face_dof(f));
  return out;
}

Eigen::VectorXd HmmInstance::stabilisation(std::size_t K, const Tensor& lambda) const {
  const Cell& cell = mesh_->cell(K);
  Eigen::VectorXd b(static_cast<Eigen::Index>(cell.faces.size()));
  for (std::size_t j = 0; j < cell.faces.size(); ++j) {
    const CellFace& cf = cell.faces[j];
    b[static_cast<Eigen::Index>(j)] =
        beta_ * mesh_->face(cf.face).measure * cf.normal.dot(lambda * cf.normal) / cf.distance;
  }
  return b;
}

Eigen::VectorXd HmmInstance::local_values(const DiscreteVector& v, std::size_t K) const {
  const auto dofs = cell_dofs(K);
  Eigen::VectorXd out(static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(dofs[i])];
  return out;
}

Point HmmInstance::cell_gradient(const DiscreteVector& v, std::size_t K) const {
  return gradient_[K] * local_values(v, K);
}

Eigen::VectorXd HmmInstance::stabilization_residual(const DiscreteVector& v, std::size_t K) const {
  return residual_[K] * local_values(v, K);
}

}  // namespace vgs
