#include "vgs/gradient_disc.hpp"

#include <cmath>

namespace vgs {

const char* scheme_name(Scheme s) { return s == Scheme::Hmm ? "hmm" : "p1"; }

bool BoundarySetup::face_pinned(std::size_t face) const {
  return tags == nullptr ? true : (*tags)[face] == Gamma::Gamma1;
}

bool BoundarySetup::face_contact(std::size_t face) const {
  return tags != nullptr && (*tags)[face] == Gamma::Gamma3;
}

DiscreteVector Discretisation::interpolate(const ScalarFn& u) const {
  DiscreteVector v(num_dofs_);
  for (std::size_t d = 0; d < num_dofs_; ++d) v[d] = u(dof_point(d));
  return v;
}

void Discretisation::finalise_pieces() {
  cell_piece_offset_.assign(mesh_->num_cells() + 1, 0);
  for (const auto& p : pieces_) ++cell_piece_offset_[p.cell + 1];
  for (std::size_t k = 0; k < mesh_->num_cells(); ++k)
    cell_piece_offset_[k + 1] += cell_piece_offset_[k];
}

std::vector<Eigen::MatrixXd> Discretisation::piecewise_gram(const std::vector<Tensor>& lambda) const {
  std::vector<Eigen::MatrixXd> out(mesh_->num_cells());
  for (std::size_t k = 0; k < mesh_->num_cells(); ++k) {
    const auto dofs = cell_dofs(k);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dofs.size(), dofs.size());
    const auto [first, last] = pieces_of_cell(k);
    for (std::size_t p = first; p < last; ++p) {
      const SubTriangle& piece = pieces_[p];
      // piece dofs are a subset of the cell dofs
      std::vector<std::size_t> local(piece.dofs.size());
      for (std::size_t i = 0; i < piece.dofs.size(); ++i) {
        for (std::size_t j = 0; j < dofs.size(); ++j)
          if (dofs[j] == piece.dofs[i]) local[i] = j;
      }
      const Eigen::MatrixXd g = piece.area * piece.gradient.transpose() * lambda[k] * piece.gradient;
      for (std::size_t i = 0; i < local.size(); ++i)
        for (std::size_t j = 0; j < local.size(); ++j) a(local[i], local[j]) += g(i, j);
    }
    out[k] = std::move(a);
  }
  return out;
}

std::unique_ptr<Discretisation> make_discretisation(Scheme scheme,
                                                    std::shared_ptr<const PolytopalMesh> mesh) {
  if (scheme == Scheme::Hmm) return std::make_unique<HmmInstance>(std::move(mesh));
  return std::make_unique<P1Instance>(std::move(mesh));
}

// ---------------------------------------------------------------------------

PiecewiseField::PiecewiseField(const Discretisation& disc, DiscreteVector values)
    : disc_(&disc), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != disc.num_dofs()) {
    throw DiscretisationError("discrete vector does not match the discretisation");
  }
}

double PiecewiseField::value_on(std::size_t piece, const std::array<double, 3>& bary) const {
  const SubTriangle& p = disc_->pieces()[piece];
  double s = 0.0;
  for (std::size_t i = 0; i < p.dofs.size(); ++i) {
    const double vi = values_[static_cast<Eigen::Index>(p.dofs[i])];
    if (vi == 0.0) continue;
    s += vi * (bary[0] * p.function(i, 0) + bary[1] * p.function(i, 1) + bary[2] * p.function(i, 2));
  }
  return s;
}

Point PiecewiseField::gradient_on(std::size_t piece) const {
  const SubTriangle& p = disc_->pieces()[piece];
  Point g = Point::Zero();
  for (std::size_t i = 0; i < p.dofs.size(); ++i)
    g += values_[static_cast<Eigen::Index>(p.dofs[i])] * p.gradient.col(static_cast<Eigen::Index>(i));
  return g;
}

double PiecewiseField::trace_on(std::size_t boundary_piece, double t) const {
  const BoundaryPiece& b = disc_->boundary_pieces()[boundary_piece];
  double s = 0.0;
  for (std::size_t i = 0; i < b.dofs.size(); ++i)
    s += values_[static_cast<Eigen::Index>(b.dofs[i])] *
         ((1.0 - t) * b.weights(i, 0) + t * b.weights(i, 1));
  return s;
}

namespace {

std::array<double, 3> barycentric(const std::array<Point, 3>& t, const Point& x) {
  const double det = (t[1] - t[0]).x() * (t[2] - t[0]).y() - (t[2] - t[0]).x() * (t[1] - t[0]).y();
  const Point r = x - t[0];
  const double l1 = (r.x() * (t[2] - t[0]).y() - (t[2] - t[0]).x() * r.y()) / det;
  const double l2 = ((t[1] - t[0]).x() * r.y() - r.x() * (t[1] - t[0]).y()) / det;
  return {1.0 - l1 - l2, l1, l2};
}

}  // namespace

std::size_t PiecewiseField::locate(const Point& x) const {
  const auto& pieces = disc_->pieces();
  constexpr double eps = 1e-12;
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    const auto b = barycentric(pieces[p].vertices, x);
    if (b[0] >= -eps && b[1] >= -eps && b[2] >= -eps) return p;
  }
  throw DiscretisationError("point lies outside the mesh");
}

double PiecewiseField::value(const Point& x) const {
  const std::size_t p = locate(x);
  return value_on(p, barycentric(disc_->pieces()[p].vertices, x));
}

Point PiecewiseField::gradient(const Point& x) const { return gradient_on(locate(x)); }

PiecewiseField reconstruct_function(const Discretisation& disc, const DiscreteVector& v) {
  return PiecewiseField(disc, v);
}
PiecewiseField reconstruct_gradient(const Discretisation& disc, const DiscreteVector& v) {
  return PiecewiseField(disc, v);
}
PiecewiseField reconstruct_trace(const Discretisation& disc, const DiscreteVector& v) {
  return PiecewiseField(disc, v);
}

}  // namespace vgs
