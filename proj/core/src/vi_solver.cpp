#include "vgs/vi_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>

#include <Eigen/Cholesky>

namespace vgs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double KktResiduals::max() const {
  return std::max({feasibility, multiplier_sign, complementarity, flux_jump, balance});
}

BoundaryTags problem_tags(const VIProblem& problem, const PolytopalMesh& mesh) {
  if (problem.kind == ProblemKind::Obstacle) {
    return tag_boundary(mesh, [](const Point&) { return Gamma::Gamma1; });
  }
  if (!problem.boundary) throw SolverError("Signorini problem without a boundary partition");
  BoundaryTags tags = tag_boundary(mesh, problem.boundary);
  if (tags.count(Gamma::Gamma1) == 0) {
    throw SolverError("Signorini problem needs a non-empty Dirichlet part Gamma1");
  }
  return tags;
}

DiscreteBarrier discretise_barrier(const VIProblem& problem, const Discretisation& disc,
                                   const BoundaryTags& tags) {
  DiscreteBarrier out;
  out.kind = problem.kind;
  out.sense = problem.sense;
  const BoundarySetup bc{&tags};
  out.dofs = problem.kind == ProblemKind::Obstacle ? disc.obstacle_dofs(bc) : disc.contact_dofs(bc);
  out.values.resize(static_cast<Eigen::Index>(out.dofs.size()));
  const double unconstrained = problem.sense == BarrierSense::Upper ? kInf : -kInf;
  for (std::size_t i = 0; i < out.dofs.size(); ++i) {
    const double v = problem.barrier ? problem.barrier(disc.dof_point(out.dofs[i])) : unconstrained;
    if (std::isnan(v) || v == -unconstrained) {
      throw SolverError("barrier sample at unknown " + std::to_string(out.dofs[i]) +
                        " is not admissible (" + std::to_string(v) + ")");
    }
    out.values[static_cast<Eigen::Index>(i)] = v;
  }
  return out;
}

std::shared_ptr<QpContext> build_qp(const VIProblem& problem, const Discretisation& disc,
                                    const BoundaryTags& tags) {
  auto qp = std::make_shared<QpContext>();
  qp->disc = &disc;
  qp->kind = problem.kind;
  qp->sign = problem.sense == BarrierSense::Upper ? 1.0 : -1.0;
  const PolytopalMesh& mesh = disc.mesh();
  if (!problem.diffusion || !problem.source) throw SolverError("problem lacks diffusion or source");

  const DiffusionField lambda = DiffusionField::sampled(mesh, problem.diffusion);
  qp->matrix = stiffness_matrix(disc, lambda);
  qp->rhs = qp->sign * load_dofs(disc, problem.source);

  const BoundarySetup bc{&tags};
  qp->pinned = disc.pinned_mask(bc);
  const auto n = static_cast<Eigen::Index>(disc.num_dofs());
  qp->pinned_values = Eigen::VectorXd::Zero(n);
  if (problem.dirichlet) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (qp->pinned[static_cast<std::size_t>(i)])
        qp->pinned_values[i] = qp->sign * problem.dirichlet(disc.dof_point(static_cast<std::size_t>(i)));
  }

  const DiscreteBarrier barrier = discretise_barrier(problem, disc, tags);
  std::vector<char> is_constrained(disc.num_dofs(), 0);
  for (std::size_t i = 0; i < barrier.dofs.size(); ++i) {
    const double c = qp->sign * barrier.values[static_cast<Eigen::Index>(i)];
    if (c == kInf) continue;
    qp->constrained.push_back(barrier.dofs[i]);
    is_constrained[barrier.dofs[i]] = 1;
  }
  qp->bound = Eigen::VectorXd::Constant(n, kInf);
  for (std::size_t i = 0; i < barrier.dofs.size(); ++i)
    qp->bound[static_cast<Eigen::Index>(barrier.dofs[i])] =
        qp->sign * barrier.values[static_cast<Eigen::Index>(i)];

  qp->multiplier_scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(qp->constrained.size()));
  if (disc.scheme() == Scheme::Hmm) {
    for (std::size_t i = 0; i < qp->constrained.size(); ++i) {
      const std::size_t d = qp->constrained[i];
      if (d >= mesh.num_cells())
        qp->multiplier_scale[static_cast<Eigen::Index>(i)] = 1.0 / mesh.face(d - mesh.num_cells()).measure;
    }
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
      if (mesh.face(f).is_boundary()) continue;
      qp->interior_face_rows.push_back(mesh.num_cells() + f);
      qp->interior_face_measure.push_back(mesh.face(f).measure);
    }
  }
  for (std::size_t i = 0; i < disc.num_dofs(); ++i)
    if (!qp->pinned[i] && !is_constrained[i]) qp->balance_rows.push_back(i);
  return qp;
}

double qp_energy(const QpContext& qp, const DiscreteVector& u) {
  const Eigen::VectorXd w = qp.sign * u;
  return 0.5 * w.dot(qp.matrix * w) - qp.rhs.dot(w);
}

double energy_distance(const QpContext& qp, const DiscreteVector& u, const DiscreteVector& v) {
  const Eigen::VectorXd d = u - v;
  return std::sqrt(std::max(0.0, d.dot(qp.matrix * d)));
}

namespace {

Eigen::VectorXd scaled_multipliers(const QpContext& qp, const Eigen::VectorXd& w) {
  const Eigen::VectorXd r = qp.rhs - qp.matrix * w;
  Eigen::VectorXd lam(static_cast<Eigen::Index>(qp.constrained.size()));
  for (std::size_t i = 0; i < qp.constrained.size(); ++i)
    lam[static_cast<Eigen::Index>(i)] =
        r[static_cast<Eigen::Index>(qp.constrained[i])] * qp.multiplier_scale[static_cast<Eigen::Index>(i)];
  return lam;
}

KktResiduals residuals_w(const QpContext& qp, const Eigen::VectorXd& w) {
  KktResiduals k;
  const Eigen::VectorXd r = qp.rhs - qp.matrix * w;
  for (std::size_t i = 0; i < qp.constrained.size(); ++i) {
    const auto d = static_cast<Eigen::Index>(qp.constrained[i]);
    const double gap = qp.bound[d] - w[d];
    const double lam = r[d] * qp.multiplier_scale[static_cast<Eigen::Index>(i)];
    k.feasibility = std::max(k.feasibility, -gap);
    k.multiplier_sign = std::max(k.multiplier_sign, -lam);
    k.complementarity = std::max(k.complementarity, std::abs(std::min(gap, lam)));
  }
  for (std::size_t i = 0; i < qp.interior_face_rows.size(); ++i) {
    const auto d = static_cast<Eigen::Index>(qp.interior_face_rows[i]);
    if (qp.pinned[static_cast<std::size_t>(d)]) continue;
    k.flux_jump = std::max(k.flux_jump, std::abs(r[d]) / qp.interior_face_measure[i]);
  }
  for (std::size_t d : qp.balance_rows)
    k.balance = std::max(k.balance, std::abs(r[static_cast<Eigen::Index>(d)]));
  return k;
}

class ActiveSetRunner {
 public:
  ActiveSetRunner(const QpContext& qp, const SolverOptions& opt) : qp_(qp), opt_(opt) {
    m_ = qp.constrained.size();
  }

  Eigen::VectorXd solve_with(const std::vector<char>& saturated) {
    std::vector<char> pinned = qp_.pinned;
    Eigen::VectorXd values = qp_.pinned_values;
    std::size_t count = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (!saturated[i]) continue;
      const std::size_t d = qp_.constrained[i];
      pinned[d] = 1;
      values[static_cast<Eigen::Index>(d)] = qp_.bound[static_cast<Eigen::Index>(d)];
      ++count;
    }
    const SparseSpdSystem sys = restrict_system(qp_.matrix, qp_.rhs, pinned, values);
    ++state.niter;
    state.history.push_back(count);
    return solve_spd(sys, opt_.linear);
  }

  // lambda in raw units (b - A w) on constrained unknowns
  Eigen::VectorXd raw_multipliers(const Eigen::VectorXd& w) const {
    const Eigen::VectorXd r = qp_.rhs - qp_.matrix * w;
    Eigen::VectorXd lam(static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i)
      lam[static_cast<Eigen::Index>(i)] = r[static_cast<Eigen::Index>(qp_.constrained[i])];
    return lam;
  }

  double bound(std::size_t i) const { return qp_.bound[static_cast<Eigen::Index>(qp_.constrained[i])]; }
  double value(const Eigen::VectorXd& w, std::size_t i) const {
    return w[static_cast<Eigen::Index>(qp_.constrained[i])];
  }

  bool multipliers_ok(const Eigen::VectorXd& w, const std::vector<char>& saturated) const {
    const Eigen::VectorXd lam = scaled_multipliers(qp_, w);
    for (std::size_t i = 0; i < m_; ++i)
      if (saturated[i] && lam[static_cast<Eigen::Index>(i)] < -opt_.tol) return false;
    return true;
  }

  Eigen::VectorXd run() {
    const std::size_t cap = opt_.max_iterations ? opt_.max_iterations : m_ + 1;
    std::vector<char> sat(m_, opt_.initial == InitialSet::Full ? 1 : 0);
    Eigen::VectorXd w = solve_with(sat);
    bool capped = false;
    while (true) {
      std::vector<std::size_t> violators;
      for (std::size_t i = 0; i < m_; ++i)
        if (!sat[i] && value(w, i) > bound(i) - opt_.tie_tol) violators.push_back(i);
      if (violators.empty()) break;
      if (state.niter >= cap) {
        capped = true;
        break;
      }
      const std::vector<char> before = sat;
      for (std::size_t i : violators) sat[i] = 1;
      for (std::size_t i = 0; i < m_; ++i)
        if (before[i] && !sat[i]) throw std::logic_error("saturated set shrank in the monotone phase");
      w = solve_with(sat);
    }
    if (!capped && multipliers_ok(w, sat)) {
      finish(sat);
      return w;
    }
    if (!opt_.allow_fallback) {
      throw SolverError(capped ? "monotony iteration cap exceeded (" + std::to_string(cap) + " solves)"
                               : "monotony algorithm ended with multipliers of the wrong sign");
    }
    if (!capped) {
      if (auto r = pdas(w, sat)) return *r;
    }
    return primal();
  }

  std::optional<Eigen::VectorXd> pdas(Eigen::VectorXd w, std::vector<char> sat) {
    state.phase = "pdas";
    std::set<std::vector<char>> seen;
    seen.insert(sat);
    const std::size_t cap = 2 * (m_ + 1);
    for (std::size_t it = 0; it < cap; ++it) {
      const Eigen::VectorXd lam = raw_multipliers(w);
      std::vector<char> next(m_, 0);
      for (std::size_t i = 0; i < m_; ++i) {
        const double l = sat[i] ? lam[static_cast<Eigen::Index>(i)] : 0.0;
        next[i] = (l + (value(w, i) - bound(i)) > 0.0) ? 1 : 0;
      }
      if (next == sat) {
        const KktResiduals k = residuals_w(qp_, w);
        if (k.feasibility <= opt_.tol && k.multiplier_sign <= opt_.tol) {
          finish(sat);
          return w;
        }
        return std::nullopt;
      }
      if (!seen.insert(next).second) return std::nullopt;
      sat = std::move(next);
      w = solve_with(sat);
    }
    return std::nullopt;
  }

  // Primal active-set method with step lengths; iterates stay feasible and
  // the energy decreases, so it terminates.
  Eigen::VectorXd primal() {
    state.phase = "primal";
    std::vector<char> work(m_, 1);
    Eigen::VectorXd w = solve_with(work);
    const std::size_t cap = 10 * (m_ + 1) + 100;
    for (std::size_t it = 0; it < cap; ++it) {
      const Eigen::VectorXd lam = scaled_multipliers(qp_, w);
      std::size_t worst = m_;
      double most = -0.1 * opt_.tol;
      for (std::size_t i = 0; i < m_; ++i) {
        if (work[i] && lam[static_cast<Eigen::Index>(i)] < most) {
          most = lam[static_cast<Eigen::Index>(i)];
          worst = i;
        }
      }
      if (worst == m_) {
        finish(work);
        return w;
      }
      work[worst] = 0;
      while (true) {
        const Eigen::VectorXd target = solve_with(work);
        double alpha = 1.0;
        std::size_t block = m_;
        for (std::size_t i = 0; i < m_; ++i) {
          if (work[i]) continue;
          const double step = value(target, i) - value(w, i);
          if (value(target, i) > bound(i) && step > 0.0) {
            const double a = std::max(0.0, (bound(i) - value(w, i)) / step);
            if (a < alpha) {
              alpha = a;
              block = i;
            }
          }
        }
        if (block == m_) {
          w = target;
          break;
        }
        w += alpha * (target - w);
        w[static_cast<Eigen::Index>(qp_.constrained[block])] = bound(block);
        work[block] = 1;
      }
    }
    throw SolverError("active-set fallback did not terminate within " + std::to_string(cap) + " steps");
  }

  void finish(const std::vector<char>& sat) {
    state.saturated.clear();
    for (std::size_t i = 0; i < m_; ++i)
      if (sat[i]) state.saturated.push_back(qp_.constrained[i]);
  }

  ActiveSetState state;

 private:
  const QpContext& qp_;
  const SolverOptions& opt_;
  std::size_t m_ = 0;
};

VISolution make_solution(std::shared_ptr<const QpContext> qp, const Eigen::VectorXd& w,
                         ActiveSetState state) {
  VISolution s;
  s.u = qp->sign * w;
  s.constrained = qp->constrained;
  s.multipliers = scaled_multipliers(*qp, w);
  s.state = std::move(state);
  s.kkt = residuals_w(*qp, w);
  s.energy = 0.5 * w.dot(qp->matrix * w) - qp->rhs.dot(w);
  s.qp = std::move(qp);
  return s;
}

}  // namespace

KktResiduals kkt_residuals(const QpContext& qp, const DiscreteVector& u) {
  return residuals_w(qp, qp.sign * u);
}

KktResiduals kkt_residuals(const VISolution& solution) {
  if (!solution.qp) throw SolverError("solution carries no problem context");
  return kkt_residuals(*solution.qp, solution.u);
}

VISolution solve_qp(std::shared_ptr<const QpContext> qp, const SolverOptions& options) {
  ActiveSetRunner runner(*qp, options);
  const Eigen::VectorXd w = runner.run();
  VISolution s = make_solution(qp, w, runner.state);
  if (!(s.kkt.max() <= options.tol)) {
    throw SolverError("solution fails the KKT check (max residual " + std::to_string(s.kkt.max()) + ")");
  }
  return s;
}

VISolution solve_vi(const Discretisation& disc, const VIProblem& problem, const SolverOptions& options) {
  const BoundaryTags tags = problem_tags(problem, disc.mesh());
  return solve_qp(build_qp(problem, disc, tags), options);
}

VISolution solve_obstacle(const Discretisation& disc, const VIProblem& problem,
                          const SolverOptions& options) {
  if (problem.kind != ProblemKind::Obstacle) throw SolverError("not an obstacle problem");
  return solve_vi(disc, problem, options);
}

VISolution solve_signorini(const Discretisation& disc, const VIProblem& problem,
                           const SolverOptions& options) {
  if (problem.kind != ProblemKind::Signorini) throw SolverError("not a Signorini problem");
  return solve_vi(disc, problem, options);
}

// ---------------------------------------------------------------------------

VISolution oracle_solve(std::shared_ptr<const QpContext> qp, double tol) {
  const std::size_t m = qp->constrained.size();
  if (m > 20) throw SolverError("oracle limited to 20 constrained unknowns");
  const auto n = static_cast<Eigen::Index>(qp->pinned.size());
  const Eigen::MatrixXd a = Eigen::MatrixXd(qp->matrix);

  std::optional<Eigen::VectorXd> best;
  double best_energy = kInf;
  std::vector<char> best_set;
  const std::size_t subsets = std::size_t{1} << m;
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    std::vector<char> pinned = qp->pinned;
    Eigen::VectorXd w = qp->pinned_values;
    for (std::size_t i = 0; i < m; ++i) {
      if (!((mask >> i) & 1U)) continue;
      const std::size_t d = qp->constrained[i];
      pinned[d] = 1;
      w[static_cast<Eigen::Index>(d)] = qp->bound[static_cast<Eigen::Index>(d)];
    }
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!pinned[static_cast<std::size_t>(i)]) free.push_back(i);
    for (Eigen::Index i = 0; i < n; ++i)
      if (!pinned[static_cast<std::size_t>(i)]) w[i] = 0.0;
    const auto nf = static_cast<Eigen::Index>(free.size());
    if (nf > 0) {
      Eigen::MatrixXd aff(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (Eigen::Index i = 0; i < nf; ++i) {
        rhs[i] = qp->rhs[free[static_cast<std::size_t>(i)]] - a.row(free[static_cast<std::size_t>(i)]).dot(w);
        for (Eigen::Index j = 0; j < nf; ++j)
          aff(i, j) = a(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(aff);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) continue;
      const Eigen::VectorXd x = ldlt.solve(rhs);
      for (Eigen::Index i = 0; i < nf; ++i) w[free[static_cast<std::size_t>(i)]] = x[i];
    }
    const KktResiduals k = residuals_w(*qp, w);
    if (k.feasibility > tol || k.multiplier_sign > tol) continue;
    const double e = 0.5 * w.dot(a * w) - qp->rhs.dot(w);
    if (e < best_energy) {
      best_energy = e;
      best = w;
      best_set.assign(m, 0);
      for (std::size_t i = 0; i < m; ++i) best_set[i] = (mask >> i) & 1U;
    }
  }
  if (!best) throw SolverError("oracle found no KKT-consistent active set");
  ActiveSetState state;
  state.phase = "oracle";
  state.niter = subsets;
  for (std::size_t i = 0; i < m; ++i)
    if (best_set[i]) state.saturated.push_back(qp->constrained[i]);
  return make_solution(qp, *best, state);
}

VISolution oracle_solve(const Discretisation& disc, const VIProblem& problem, double tol) {
  const BoundaryTags tags = problem_tags(problem, disc.mesh());
  return oracle_solve(build_qp(problem, disc, tags), tol);
}

}  // namespace vgs
