#include "vgs/analysis.hpp"

#include <charconv>
#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>

#include "vgs/assembly.hpp"

namespace vgs {

namespace {

std::vector<TriangleNode> error_rule(int refine_levels) {
  const int levels = refine_levels < 0 ? quadrature_refinement_from_env() : refine_levels;
  return refined_triangle_rule(2, levels);
}

Eigen::Matrix3d linear_mass(double area) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Constant(1.0);
  m.diagonal().setConstant(2.0);
  return area / 12.0 * m;
}

using Triplet = Eigen::Triplet<double>;

SparseMatrix function_mass(const Discretisation& disc) {
  std::vector<Triplet> trip;
  for (const SubTriangle& p : disc.pieces()) {
    const Eigen::MatrixXd m = p.function * linear_mass(p.area) * p.function.transpose();
    for (std::size_t i = 0; i < p.dofs.size(); ++i)
      for (std::size_t j = 0; j < p.dofs.size(); ++j) {
        const double v = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (v != 0.0) trip.emplace_back(static_cast<int>(p.dofs[i]), static_cast<int>(p.dofs[j]), v);
      }
  }
  const auto n = static_cast<Eigen::Index>(disc.num_dofs());
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseMatrix trace_mass(const Discretisation& disc) {
  std::vector<Triplet> trip;
  for (const BoundaryPiece& b : disc.boundary_pieces()) {
    Eigen::Matrix2d loc;
    loc << 2.0, 1.0, 1.0, 2.0;
    loc *= b.length / 6.0;
    const Eigen::MatrixXd m = b.weights * loc * b.weights.transpose();
    for (std::size_t i = 0; i < b.dofs.size(); ++i)
      for (std::size_t j = 0; j < b.dofs.size(); ++j)
        trip.emplace_back(static_cast<int>(b.dofs[i]), static_cast<int>(b.dofs[j]),
                          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  }
  const auto n = static_cast<Eigen::Index>(disc.num_dofs());
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseMatrix gradient_gram(const Discretisation& disc) {
  return stiffness_matrix(disc, DiffusionField::constant(disc.mesh(), Tensor::Identity()));
}

SparseMatrix restrict_square(const SparseMatrix& a, const std::vector<long>& local, Eigen::Index nf) {
  std::vector<Triplet> trip;
  for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
    const long lc = local[static_cast<std::size_t>(c)];
    if (lc < 0) continue;
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
      const long lr = local[static_cast<std::size_t>(it.row())];
      if (lr >= 0) trip.emplace_back(static_cast<int>(lr), static_cast<int>(lc), it.value());
    }
  }
  SparseMatrix out(nf, nf);
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

struct PowerResult {
  double mu = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

// Largest mu with M x = mu K x, K factorised.
PowerResult largest_eigenvalue(const Eigen::SimplicialLLT<SparseMatrix>& k_llt, const SparseMatrix& k,
                               const SparseMatrix& m, const PowerIterationOptions& opt) {
  const Eigen::Index n = k.rows();
  PowerResult r;
  if (n == 1) {
    r.mu = m.coeff(0, 0) / k.coeff(0, 0);
    return r;
  }
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = dist(rng);
  double prev = -1.0;
  r.converged = false;
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    Eigen::VectorXd y = k_llt.solve(m * x);
    const double ky = std::sqrt(std::max(y.dot(k * y), 1e-300));
    x = y / ky;
    const double mu = x.dot(m * x);
    r.mu = mu;
    r.iterations = it;
    if (prev >= 0.0 && std::abs(mu - prev) <= opt.rel_tol * std::abs(mu)) {
      r.converged = true;
      break;
    }
    prev = mu;
  }
  return r;
}

}  // namespace

L2Errors l2_errors(const Discretisation& disc, const DiscreteVector& u, const ScalarFn& value,
                   const VectorFn& gradient, int refine_levels) {
  const PiecewiseField field(disc, u);
  const auto rule = error_rule(refine_levels);
  double ef = 0.0, eg = 0.0, nf = 0.0, ng = 0.0;
  for (std::size_t p = 0; p < disc.pieces().size(); ++p) {
    const SubTriangle& piece = disc.pieces()[p];
    const Point g = field.gradient_on(p);
    for (const auto& node : rule) {
      const Point x = barycentric_point(piece.vertices, node.bary);
      const double w = piece.area * node.weight;
      const double ue = value ? value(x) : 0.0;
      const Point ge = gradient ? gradient(x) : Point(Point::Zero());
      const double df = field.value_on(p, node.bary) - ue;
      ef += w * df * df;
      nf += w * ue * ue;
      eg += w * (g - ge).squaredNorm();
      ng += w * ge.squaredNorm();
    }
  }
  L2Errors out;
  out.exact_function_norm = std::sqrt(nf);
  out.exact_gradient_norm = std::sqrt(ng);
  out.function_absolute = !(nf > 0.0);
  out.gradient_absolute = !(ng > 0.0);
  out.function = out.function_absolute ? std::sqrt(ef) : std::sqrt(ef / nf);
  out.gradient = out.gradient_absolute ? std::sqrt(eg) : std::sqrt(eg / ng);
  return out;
}

ConsistencyValue consistency_indicator(const Discretisation& disc, const ScalarFn& phi,
                                       const VectorFn& grad_phi, const DiscreteVector& v,
                                       int refine_levels) {
  const L2Errors e = l2_errors(disc, v, phi, grad_phi, refine_levels);
  ConsistencyValue out;
  out.function = e.function_absolute ? e.function : e.function * e.exact_function_norm;
  out.gradient = e.gradient_absolute ? e.gradient : e.gradient * e.exact_gradient_norm;
  return out;
}

DiscreteVector conformity_functional(const Discretisation& disc, const VectorFn& psi,
                                     const ScalarFn& div_psi, int refine_levels) {
  DiscreteVector l = DiscreteVector::Zero(static_cast<Eigen::Index>(disc.num_dofs()));
  const int levels = refine_levels < 0 ? quadrature_refinement_from_env() : refine_levels;
  const auto rule = refined_triangle_rule(5, levels);
  for (const SubTriangle& p : disc.pieces()) {
    Point psi_int = Point::Zero();
    Eigen::Vector3d div_moments = Eigen::Vector3d::Zero();
    for (const auto& node : rule) {
      const Point x = barycentric_point(p.vertices, node.bary);
      const double w = p.area * node.weight;
      psi_int += w * psi(x);
      const double dv = div_psi(x);
      for (int c = 0; c < 3; ++c) div_moments[c] += w * dv * node.bary[static_cast<std::size_t>(c)];
    }
    for (std::size_t i = 0; i < p.dofs.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      l[static_cast<Eigen::Index>(p.dofs[i])] +=
          p.gradient.col(ii).dot(psi_int) + p.function.row(ii).dot(div_moments.transpose());
    }
  }
  std::vector<SegmentNode> srule;
  const int parts = 1 << levels;
  for (int j = 0; j < parts; ++j) {
    for (const SegmentNode& node : segment_rule(5)) srule.push_back({(j + node.t) / parts, node.weight / parts});
  }
  for (const BoundaryPiece& b : disc.boundary_pieces()) {
    Eigen::Vector2d moments = Eigen::Vector2d::Zero();
    for (const auto& node : srule) {
      const Point x = (1.0 - node.t) * b.ends[0] + node.t * b.ends[1];
      const double w = b.length * node.weight * psi(x).dot(b.normal);
      moments[0] += w * (1.0 - node.t);
      moments[1] += w * node.t;
    }
    for (std::size_t i = 0; i < b.dofs.size(); ++i)
      l[static_cast<Eigen::Index>(b.dofs[i])] -= b.weights.row(static_cast<Eigen::Index>(i)).dot(moments.transpose());
  }
  return l;
}

double limit_conformity_indicator(const Discretisation& disc, const BoundarySetup& bc,
                                  const VectorFn& psi, const ScalarFn& div_psi, int refine_levels) {
  const DiscreteVector l = conformity_functional(disc, psi, div_psi, refine_levels);
  const auto pinned = disc.pinned_mask(bc);
  const SparseSpdSystem sys =
      restrict_system(gradient_gram(disc), l, pinned,
                      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(disc.num_dofs())));
  if (sys.matrix.rows() == 0) throw AnalysisError("W_D needs a non-trivial discrete space");
  LinearSolveOptions opt;
  opt.residual_tol = 1e-8;
  const DiscreteVector r = solve_spd(sys, opt);
  double s = 0.0;
  for (std::size_t i = 0; i < sys.retained.size(); ++i)
    s += l[static_cast<Eigen::Index>(sys.retained[i])] * r[static_cast<Eigen::Index>(sys.retained[i])];
  return std::sqrt(std::max(0.0, s));
}

CoercivityEstimate coercivity_estimate(const Discretisation& disc, const BoundarySetup& bc,
                                       bool with_trace, const PowerIterationOptions& options) {
  const auto pinned = disc.pinned_mask(bc);
  std::vector<long> local(pinned.size(), -1);
  Eigen::Index nf = 0;
  for (std::size_t i = 0; i < pinned.size(); ++i)
    if (!pinned[i]) local[i] = nf++;
  if (nf == 0) throw AnalysisError("C_D needs a non-trivial discrete space");

  const SparseMatrix k = restrict_square(gradient_gram(disc), local, nf);
  const SparseMatrix mf = restrict_square(function_mass(disc), local, nf);
  Eigen::SimplicialLLT<SparseMatrix> llt(k);
  if (llt.info() != Eigen::Success) throw AnalysisError("grad_D Gram matrix is not positive definite");

  CoercivityEstimate out;
  const PowerResult pf = largest_eigenvalue(llt, k, mf, options);
  out.function_part = std::sqrt(pf.mu);
  out.iterations = pf.iterations;
  out.converged = pf.converged;
  out.value = out.function_part;
  if (!with_trace) return out;

  const SparseMatrix mt = restrict_square(trace_mass(disc), local, nf);
  const PowerResult pt = largest_eigenvalue(llt, k, mt, options);
  out.trace_part = std::sqrt(pt.mu);
  out.iterations += pt.iterations;
  out.converged = out.converged && pt.converged;

  // (a + b)^2 = min_t (1 + t) a^2 + (1 + 1/t) b^2; minimise over log t
  const auto combined = [&](double s) {
    const double t = std::exp(s);
    const SparseMatrix m = (1.0 + t) * mf + (1.0 + 1.0 / t) * mt;
    PowerResult p = largest_eigenvalue(llt, k, m, options);
    out.iterations += p.iterations;
    out.converged = out.converged && p.converged;
    return p.mu;
  };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = -8.0, hi = 8.0;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = combined(x1), f2 = combined(x2);
  for (int it = 0; it < 40; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = combined(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = combined(x2);
    }
  }
  out.value = std::sqrt(std::min(f1, f2));
  return out;
}

DefectValue boundary_defect(const Discretisation& disc, const VectorFn& flux, const ScalarFn& exact,
                            const DiscreteVector& v, const std::function<bool(std::size_t)>& include) {
  const PiecewiseField field(disc, v);
  const auto rule = segment_rule(5);
  DefectValue out;
  for (std::size_t i = 0; i < disc.boundary_pieces().size(); ++i) {
    const BoundaryPiece& b = disc.boundary_pieces()[i];
    if (include && !include(b.face)) continue;
    for (const auto& node : rule) {
      const Point x = (1.0 - node.t) * b.ends[0] + node.t * b.ends[1];
      out.value += b.length * node.weight * flux(x).dot(b.normal) * (field.trace_on(i, node.t) - exact(x));
    }
  }
  return out;
}

DefectValue interior_defect(const Discretisation& disc, const ScalarFn& residual, const ScalarFn& exact,
                            const DiscreteVector& v) {
  const PiecewiseField field(disc, v);
  const auto rule = triangle_rule(5);
  DefectValue out;
  for (std::size_t p = 0; p < disc.pieces().size(); ++p) {
    const SubTriangle& piece = disc.pieces()[p];
    for (const auto& node : rule) {
      const Point x = barycentric_point(piece.vertices, node.bary);
      out.value += piece.area * node.weight * residual(x) * (exact(x) - field.value_on(p, node.bary));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

double observed_order(double e0, double e1, double h0, double h1) {
  return std::log(e0 / e1) / std::log(h0 / h1);
}

ConvergenceReport orders(std::vector<ErrorRecord> records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!(records[i].h > 0.0)) throw AnalysisError("mesh size must be positive");
    if (i > 0 && !(records[i].h < records[i - 1].h)) {
      throw AnalysisError("orders need strictly decreasing mesh sizes");
    }
  }
  ConvergenceReport rep;
  rep.records = std::move(records);
  const std::size_t n = rep.records.size();
  rep.order_fun.assign(n, std::nullopt);
  rep.order_grad.assign(n, std::nullopt);
  for (std::size_t i = 1; i < n; ++i) {
    const ErrorRecord& a = rep.records[i - 1];
    const ErrorRecord& b = rep.records[i];
    if (a.failed || b.failed) continue;
    if (a.err_fun && b.err_fun && *a.err_fun > 0.0 && *b.err_fun > 0.0)
      rep.order_fun[i] = observed_order(*a.err_fun, *b.err_fun, a.h, b.h);
    if (a.err_grad && b.err_grad && *a.err_grad > 0.0 && *b.err_grad > 0.0)
      rep.order_grad[i] = observed_order(*a.err_grad, *b.err_grad, a.h, b.h);
  }
  return rep;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 10);
  return std::string(buf, res.ptr);
}

std::string to_csv(const ConvergenceReport& report) {
  const auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("-"); };
  std::string out = "h,err_fun,err_grad,order_fun,order_grad,niter,WD,CD\n";
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const ErrorRecord& r = report.records[i];
    out += format_number(r.h);
    if (r.failed) {
      out += ",-,-,-,-,failed,-,-\n";
      continue;
    }
    out += ',' + opt(r.err_fun) + ',' + opt(r.err_grad) + ',' + opt(report.order_fun[i]) + ',' +
           opt(report.order_grad[i]) + ',' + (r.niter ? std::to_string(*r.niter) : std::string("-")) +
           ',' + opt(r.wd) + ',' + opt(r.cd) + '\n';
  }
  return out;
}

}  // namespace vgs
