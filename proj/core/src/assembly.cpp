#include "vgs/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace vgs {

namespace {

void require_spd(const Tensor& lambda, const std::string& where) {
  const double scale = std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
  if (!lambda.allFinite() || std::abs(lambda(0, 1) - lambda(1, 0)) > 1e-12 * scale) {
    throw AssemblyError(where + ": diffusion tensor is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Tensor> es(lambda);
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    throw AssemblyError(where + ": diffusion tensor is not positive definite");
  }
}

}  // namespace

DiffusionField::DiffusionField(std::vector<Tensor> tensors, std::optional<double> lambda_min,
                               std::optional<double> lambda_max)
    : tensors_(std::move(tensors)) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t k = 0; k < tensors_.size(); ++k) {
    require_spd(tensors_[k], "cell " + std::to_string(k));
    Eigen::SelfAdjointEigenSolver<Tensor> es(tensors_[k]);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  }
  lambda_min_ = lambda_min.value_or(lo);
  lambda_max_ = lambda_max.value_or(hi);
  if (!(lambda_min_ > 0.0) || lambda_max_ < lambda_min_) {
    throw AssemblyError("invalid diffusion eigenvalue bounds");
  }
  const double slack = 1e-12 * lambda_max_;
  if (!tensors_.empty() && (lo < lambda_min_ - slack || hi > lambda_max_ + slack)) {
    throw AssemblyError("diffusion tensor eigenvalues outside the declared bounds");
  }
}

DiffusionField DiffusionField::constant(const PolytopalMesh& mesh, const Tensor& lambda) {
  return DiffusionField(std::vector<Tensor>(mesh.num_cells(), lambda));
}

DiffusionField DiffusionField::sampled(const PolytopalMesh& mesh, const TensorFn& lambda) {
  std::vector<Tensor> t(mesh.num_cells());
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) t[k] = lambda(mesh.cell(k).centre);
  return DiffusionField(std::move(t));
}

LocalCellMatrix local_matrix(const Discretisation& disc, const Tensor& lambda, std::size_t K) {
  require_spd(lambda, "cell " + std::to_string(K));
  LocalCellMatrix out;
  out.cell = K;
  out.dofs = disc.cell_dofs(K);
  if (disc.scheme() == Scheme::Hmm) {
    const auto& hmm = static_cast<const HmmInstance&>(disc);
    const auto& g = hmm.gradient_matrix(K);
    const auto& r = hmm.residual_matrix(K);
    const Eigen::VectorXd b = hmm.stabilisation(K, lambda);
    out.matrix = disc.mesh().cell(K).measure * g.transpose() * lambda * g +
                 r.transpose() * b.asDiagonal() * r;
  } else {
    const auto& p1 = static_cast<const P1Instance&>(disc);
    const auto& g = p1.shape_gradients(K);
    out.matrix = disc.mesh().cell(K).measure * g.transpose() * lambda * g;
  }
  return out;
}

Eigen::VectorXd fluxes(const HmmInstance& disc, const Tensor& lambda, const DiscreteVector& u,
                       std::size_t K) {
  const LocalCellMatrix a = local_matrix(disc, lambda, K);
  const Eigen::VectorXd au = a.matrix * disc.local_values(u, K);
  const Cell& cell = disc.mesh().cell(K);
  Eigen::VectorXd f(static_cast<Eigen::Index>(cell.faces.size()));
  for (std::size_t j = 0; j < cell.faces.size(); ++j) {
    f[static_cast<Eigen::Index>(j)] =
        -au[static_cast<Eigen::Index>(j + 1)] / disc.mesh().face(cell.faces[j].face).measure;
  }
  return f;
}

Eigen::VectorXd load_vector(const PolytopalMesh& mesh, const ScalarFn& f, int refine_levels) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(mesh.num_cells()));
  if (refine_levels < 0) {
    for (std::size_t k = 0; k < mesh.num_cells(); ++k)
      out[static_cast<Eigen::Index>(k)] = mesh.cell(k).measure * f(mesh.cell(k).centre);
    return out;
  }
  const auto rule = refined_triangle_rule(5, refine_levels);
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const Cell& cell = mesh.cell(k);
    double s = 0.0;
    for (std::size_t j = 0; j < cell.vertices.size(); ++j) {
      const std::array<Point, 3> tri = {cell.centre, mesh.vertex(cell.vertices[j]),
                                        mesh.vertex(cell.vertices[(j + 1) % cell.vertices.size()])};
      const double area = triangle_area(tri[0], tri[1], tri[2]);
      for (const auto& node : rule) s += area * node.weight * f(barycentric_point(tri, node.bary));
    }
    out[static_cast<Eigen::Index>(k)] = s;
  }
  return out;
}

DiscreteVector load_dofs(const Discretisation& disc, const ScalarFn& f) {
  DiscreteVector b = DiscreteVector::Zero(static_cast<Eigen::Index>(disc.num_dofs()));
  const PolytopalMesh& mesh = disc.mesh();
  if (disc.scheme() == Scheme::Hmm) {
    const Eigen::VectorXd cells = load_vector(mesh, f);
    b.head(static_cast<Eigen::Index>(mesh.num_cells())) = cells;
    return b;
  }
  const auto rule = triangle_rule(5);
  for (const SubTriangle& t : disc.pieces()) {
    for (const auto& node : rule) {
      const double w = t.area * node.weight * f(barycentric_point(t.vertices, node.bary));
      for (std::size_t i = 0; i < 3; ++i) b[static_cast<Eigen::Index>(t.dofs[i])] += w * node.bary[i];
    }
  }
  return b;
}

SparseMatrix stiffness_matrix(const Discretisation& disc, const DiffusionField& lambda) {
  const PolytopalMesh& mesh = disc.mesh();
  if (lambda.size() != mesh.num_cells()) {
    throw AssemblyError("diffusion field does not match the mesh");
  }
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> trip;
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const LocalCellMatrix a = local_matrix(disc, lambda[k], k);
    for (std::size_t i = 0; i < a.dofs.size(); ++i)
      for (std::size_t j = 0; j < a.dofs.size(); ++j)
        trip.emplace_back(static_cast<int>(a.dofs[i]), static_cast<int>(a.dofs[j]),
                          a.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  }
  const auto n = static_cast<Eigen::Index>(disc.num_dofs());
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

SparseSpdSystem restrict_system(const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                                const std::vector<char>& pinned,
                                const Eigen::VectorXd& pinned_values, bool require_anchor) {
  const std::size_t n = pinned.size();
  if (static_cast<std::size_t>(matrix.rows()) != n || static_cast<std::size_t>(rhs.size()) != n ||
      static_cast<std::size_t>(pinned_values.size()) != n) {
    throw AssemblyError("system dimensions do not match");
  }
  SparseSpdSystem sys;
  sys.pinned = pinned;
  sys.pinned_values = pinned_values;
  std::vector<long> local(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!pinned[i]) {
      local[i] = static_cast<long>(sys.retained.size());
      sys.retained.push_back(i);
    }
  }
  const auto nf = static_cast<Eigen::Index>(sys.retained.size());
  sys.rhs.resize(nf);
  for (Eigen::Index i = 0; i < nf; ++i) sys.rhs[i] = rhs[static_cast<Eigen::Index>(sys.retained[i])];
  sys.condensable.assign(sys.retained.size(), 0);

  // union-find over free unknowns to detect blocks with no Dirichlet anchor
  std::vector<std::size_t> parent(sys.retained.size());
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<char> anchored(sys.retained.size(), 0);

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(matrix.nonZeros()));
  for (Eigen::Index col = 0; col < matrix.outerSize(); ++col) {
    const long lc = local[static_cast<std::size_t>(col)];
    for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
      const long lr = local[static_cast<std::size_t>(it.row())];
      if (lr >= 0 && lc >= 0) {
        trip.emplace_back(static_cast<int>(lr), static_cast<int>(lc), it.value());
        if (it.value() != 0.0 && lr != lc) {
          parent[find(static_cast<std::size_t>(lr))] = find(static_cast<std::size_t>(lc));
        }
      } else if (lr >= 0 && lc < 0) {
        sys.rhs[lr] -= it.value() * pinned_values[col];
        if (it.value() != 0.0) anchored[static_cast<std::size_t>(lr)] = 1;
      }
    }
  }
  sys.matrix.resize(nf, nf);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.matrix.makeCompressed();

  if (require_anchor) {
    std::vector<char> root_anchored(sys.retained.size(), 0);
    for (std::size_t i = 0; i < sys.retained.size(); ++i)
      if (anchored[i]) root_anchored[find(i)] = 1;
    for (std::size_t i = 0; i < sys.retained.size(); ++i) {
      if (!root_anchored[find(i)]) {
        throw AssemblyError("free unknowns not coupled to any Dirichlet data (unknown " +
                            std::to_string(sys.retained[i]) +
                            "); the system is singular, check the boundary conditions");
      }
    }
  }
  return sys;
}

SparseSpdSystem assemble(const Discretisation& disc, const DiffusionField& lambda,
                         const DiscreteVector& load, const std::vector<char>& pinned,
                         const Eigen::VectorXd* pinned_values) {
  const SparseMatrix a = stiffness_matrix(disc, lambda);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(disc.num_dofs()));
  SparseSpdSystem sys = restrict_system(a, load, pinned, pinned_values ? *pinned_values : zero);
  mark_condensable_cells(sys, disc);
  return sys;
}

void mark_condensable_cells(SparseSpdSystem& system, const Discretisation& disc) {
  if (disc.scheme() != Scheme::Hmm) return;
  const std::size_t nc = disc.mesh().num_cells();
  for (std::size_t i = 0; i < system.retained.size(); ++i)
    system.condensable[i] = system.retained[i] < nc ? 1 : 0;
}

namespace {

Eigen::VectorXd solve_block(const SparseMatrix& a, const Eigen::VectorXd& b, bool use_cg,
                            const LinearSolveOptions& options, LinearSolveInfo& info) {
  if (!use_cg) {
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower> llt(a);
    if (llt.info() != Eigen::Success) {
      throw SolveError("Cholesky factorisation failed: free block is not positive definite (" +
                       std::to_string(a.rows()) + " unknowns)");
    }
    info.method = "cholesky";
    return llt.solve(b);
  }
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(options.cg_tol);
  cg.setMaxIterations(10 * std::max<Eigen::Index>(a.rows(), 1));
  cg.compute(a);
  Eigen::VectorXd x = cg.solve(b);
  info.method = "cg";
  info.iterations = static_cast<std::size_t>(cg.iterations());
  if (cg.info() != Eigen::Success) {
    throw SolveError("conjugate gradient did not converge: " + std::to_string(cg.iterations()) +
                     " iterations, estimated error " + std::to_string(cg.error()));
  }
  return x;
}

}  // namespace

DiscreteVector solve_spd(const SparseSpdSystem& system, const LinearSolveOptions& options,
                         LinearSolveInfo* info_out) {
  LinearSolveInfo info;
  DiscreteVector full = system.pinned_values;
  for (std::size_t i = 0; i < system.pinned.size(); ++i)
    if (!system.pinned[i]) full[static_cast<Eigen::Index>(i)] = 0.0;
  const Eigen::Index n = system.matrix.rows();
  if (n == 0) {
    info.method = "empty";
    if (info_out) *info_out = info;
    return full;
  }
  const bool use_cg = options.method == LinearMethod::ConjugateGradient ||
                      (options.method == LinearMethod::Auto &&
                       static_cast<std::size_t>(n) > options.direct_limit);

  Eigen::VectorXd x;
  const bool condense = options.condense &&
                        std::any_of(system.condensable.begin(), system.condensable.end(),
                                    [](char c) { return c != 0; });
  if (!condense) {
    x = solve_block(system.matrix, system.rhs, use_cg, options, info);
  } else {
    // Schur complement onto the non-condensable unknowns
    std::vector<long> part(static_cast<std::size_t>(n));
    std::vector<Eigen::Index> keep, drop;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (system.condensable[static_cast<std::size_t>(i)]) {
        part[static_cast<std::size_t>(i)] = static_cast<long>(drop.size());
        drop.push_back(i);
      } else {
        part[static_cast<std::size_t>(i)] = static_cast<long>(keep.size());
        keep.push_back(i);
      }
    }
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(drop.size()));
    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> kk, kd;
    for (Eigen::Index col = 0; col < n; ++col) {
      const bool cd = system.condensable[static_cast<std::size_t>(col)];
      for (SparseMatrix::InnerIterator it(system.matrix, col); it; ++it) {
        const bool rd = system.condensable[static_cast<std::size_t>(it.row())];
        const long r = part[static_cast<std::size_t>(it.row())];
        const long c = part[static_cast<std::size_t>(col)];
        if (rd && cd) {
          if (it.row() != col && it.value() != 0.0) {
            throw AssemblyError("condensed block is not diagonal");
          }
          if (it.row() == col) diag[r] = it.value();
        } else if (!rd && !cd) {
          kk.emplace_back(static_cast<int>(r), static_cast<int>(c), it.value());
        } else if (!rd && cd) {
          kd.emplace_back(static_cast<int>(r), static_cast<int>(c), it.value());
        }
      }
    }
    if (!(diag.minCoeff() > 0.0)) throw SolveError("condensed block is not positive definite");
    const auto nk = static_cast<Eigen::Index>(keep.size());
    const auto nd = static_cast<Eigen::Index>(drop.size());
    SparseMatrix akk(nk, nk), akd(nk, nd);
    akk.setFromTriplets(kk.begin(), kk.end());
    akd.setFromTriplets(kd.begin(), kd.end());
    const Eigen::VectorXd dinv = diag.cwiseInverse();
    Eigen::VectorXd bk(nk), bd(nd);
    for (Eigen::Index i = 0; i < nk; ++i) bk[i] = system.rhs[keep[static_cast<std::size_t>(i)]];
    for (Eigen::Index i = 0; i < nd; ++i) bd[i] = system.rhs[drop[static_cast<std::size_t>(i)]];
    SparseMatrix schur = akk - SparseMatrix(akd * dinv.asDiagonal() * akd.transpose());
    schur.makeCompressed();
    Eigen::VectorXd xk;
    if (nk > 0) {
      xk = solve_block(schur, bk - akd * dinv.cwiseProduct(bd), use_cg, options, info);
    } else {
      xk.resize(0);
    }
    const Eigen::VectorXd xd = dinv.cwiseProduct(bd - akd.transpose() * xk);
    x.resize(n);
    for (Eigen::Index i = 0; i < nk; ++i) x[keep[static_cast<std::size_t>(i)]] = xk[i];
    for (Eigen::Index i = 0; i < nd; ++i) x[drop[static_cast<std::size_t>(i)]] = xd[i];
    info.method += "+condensed";
  }

  // the stored matrix is full (both triangles), so use it directly
  const double rel = [&] {
    const double r = (system.matrix * x - system.rhs).norm();
    const double nb = system.rhs.norm();
    return nb > 0.0 ? r / nb : r;
  }();
  info.relative_residual = rel;
  if (!(rel <= options.residual_tol)) {
    throw SolveError("linear solve residual " + std::to_string(rel) + " exceeds tolerance (" +
                     info.method + ")");
  }
  for (std::size_t i = 0; i < system.retained.size(); ++i)
    full[static_cast<Eigen::Index>(system.retained[i])] = x[static_cast<Eigen::Index>(i)];
  if (info_out) *info_out = info;
  return full;
}

}  // namespace vgs
