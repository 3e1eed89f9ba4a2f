#include "vgs/cases.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace vgs {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBoundaryEps = 1e-9;

bool near(double a, double b) { return std::abs(a - b) < kBoundaryEps; }

// lower half of the manufactured solution: P(y) cos(pi x)
double p_fn(double y) { return -y * (y - 0.5) * (y - 0.5); }
double p_d1(double y) { return -(y - 0.5) * (3.0 * y - 0.5); }
double p_d2(double y) { return -6.0 * y + 2.0; }

// upper half: q(x) G(y) with q = x cos^2(pi x / 2)
double g_fn(double x) { return 0.5 * (1.0 + std::cos(kPi * x)); }
double q_fn(double x) { return x * g_fn(x); }
double q_d1(double x) { return g_fn(x) - 0.5 * kPi * x * std::sin(kPi * x); }
double q_d2(double x) { return -kPi * std::sin(kPi * x) - 0.5 * kPi * kPi * x * std::cos(kPi * x); }
double big_g(double y) { return (1.0 - y) * (y - 0.5) * (y - 0.5); }
double big_g_d1(double y) { return (y - 0.5) * (2.5 - 3.0 * y); }
double big_g_d2(double y) { return 4.0 - 6.0 * y; }

constexpr double kLowerDiffusion = 100.0;

}  // namespace

const char* family_name(MeshFamily f) {
  switch (f) {
    case MeshFamily::Triangular: return "tri";
    case MeshFamily::Hexagonal: return "hex";
    case MeshFamily::Kershaw: return "kershaw";
  }
  return "?";
}

MeshFamily parse_family(const std::string& name) {
  if (name == "tri") return MeshFamily::Triangular;
  if (name == "hex") return MeshFamily::Hexagonal;
  if (name == "kershaw") return MeshFamily::Kershaw;
  throw CaseError("unknown mesh family '" + name + "' (expected tri, hex or kershaw)");
}

Scheme parse_scheme(const std::string& name) {
  if (name == "hmm") return Scheme::Hmm;
  if (name == "p1") return Scheme::P1;
  throw CaseError("unknown scheme '" + name + "' (expected hmm or p1)");
}

PolytopalMesh build_family_mesh(MeshFamily family, std::size_t n, double amplitude) {
  switch (family) {
    case MeshFamily::Triangular: return build_triangular_mesh(n, TrianglePattern::CrissCross);
    case MeshFamily::Hexagonal: return build_hexagonal_mesh(n);
    case MeshFamily::Kershaw: return build_distorted_quad_mesh(n, amplitude);
  }
  throw CaseError("unknown mesh family");
}

std::size_t resolution_for(MeshFamily family, double h, double amplitude) {
  if (!(h > 0.0)) throw CaseError("target mesh size must be positive");
  // mesh size is close to c / n; c is measured on a mid-sized mesh
  const std::size_t probe = 16;
  const double c = build_family_mesh(family, probe, amplitude).size() * static_cast<double>(probe);
  const auto guess = static_cast<long>(std::lround(c / h));
  const auto log_error = [&](long n) {
    return std::abs(std::log(build_family_mesh(family, static_cast<std::size_t>(n), amplitude).size() / h));
  };
  // only even resolutions put mesh faces on the line y = 1/2
  long best = std::max<long>(2, guess - guess % 2);
  double best_err = log_error(best);
  // walk towards the target while the neighbouring even resolution is closer
  for (long step : {2L, -2L}) {
    for (long n = best + step; n >= 2; n += step) {
      const double err = log_error(n);
      if (!(err < best_err)) break;
      best = n;
      best_err = err;
    }
  }
  return static_cast<std::size_t>(best);
}

TestCase test1_signorini() {
  TestCase tc;
  tc.name = "test1";
  tc.family = MeshFamily::Triangular;
  tc.reference_h = {0.0625, 0.05, 0.025, 0.0156};
  VIProblem& p = tc.problem;
  p.name = "test1";
  p.kind = ProblemKind::Signorini;
  p.diffusion = [](const Point&) { return Tensor::Identity(); };
  p.source = [](const Point& x) { return 2.0 * kPi * std::sin(2.0 * kPi * x.x()); };
  p.boundary = [](const Point& x) {
    if (near(x.y(), 1.0)) return Gamma::Gamma1;
    if (near(x.y(), 0.0)) return Gamma::Gamma3;
    if (near(x.x(), 0.0) || near(x.x(), 1.0)) return Gamma::Gamma2;
    return Gamma::None;
  };
  p.barrier = [](const Point&) { return 0.0; };
  p.sense = BarrierSense::Lower;
  return tc;
}

TestCase test2_signorini_exact() {
  TestCase tc;
  tc.name = "test2";
  tc.family = MeshFamily::Hexagonal;
  tc.reference_h = {0.24, 0.13, 0.07, 0.03};
  tc.subdomains = {{0.0, 1.0, 0.0, 0.5}, {0.0, 1.0, 0.5, 1.0}};
  tc.overlay = {Point(0.0, 0.5), Point(1.0, 0.5)};
  VIProblem& p = tc.problem;
  p.name = "test2";
  p.kind = ProblemKind::Signorini;
  p.diffusion = [](const Point& x) {
    return x.y() < 0.5 ? Tensor(kLowerDiffusion * Tensor::Identity()) : Tensor(Tensor::Identity());
  };
  p.source = [](const Point& x) {
    if (x.y() < 0.5) {
      return -kLowerDiffusion * std::cos(kPi * x.x()) * (p_d2(x.y()) - kPi * kPi * p_fn(x.y()));
    }
    return -(q_d2(x.x()) * big_g(x.y()) + q_fn(x.x()) * big_g_d2(x.y()));
  };
  p.boundary = [](const Point& x) {
    if (near(x.y(), 0.0) || near(x.y(), 1.0)) return Gamma::Gamma1;
    if (near(x.x(), 0.0)) return Gamma::Gamma3;
    if (near(x.x(), 1.0)) return Gamma::Gamma2;
    return Gamma::None;
  };
  p.barrier = [](const Point&) { return 0.0; };
  p.sense = BarrierSense::Upper;

  ExactSolution ex;
  ex.value = [](const Point& x) {
    if (x.y() < 0.5) return p_fn(x.y()) * std::cos(kPi * x.x());
    return q_fn(x.x()) * big_g(x.y());
  };
  ex.gradient = [](const Point& x) {
    if (x.y() < 0.5) {
      return Point(-kPi * p_fn(x.y()) * std::sin(kPi * x.x()), p_d1(x.y()) * std::cos(kPi * x.x()));
    }
    return Point(q_d1(x.x()) * big_g(x.y()), q_fn(x.x()) * big_g_d1(x.y()));
  };
  ex.flux = [grad = ex.gradient](const Point& x) {
    return Point((x.y() < 0.5 ? kLowerDiffusion : 1.0) * grad(x));
  };
  ex.residual = [](const Point&) { return 0.0; };
  p.exact = std::move(ex);
  return tc;
}

TestCase test3_obstacle(double C) {
  if (!(C < 0.0)) throw CaseError("the obstacle test needs a negative constant C");
  TestCase tc;
  tc.name = "test3";
  tc.family = MeshFamily::Triangular;
  tc.reference_h = {0.062, 0.05, 0.025, 0.016};
  VIProblem& p = tc.problem;
  p.name = "test3";
  p.kind = ProblemKind::Obstacle;
  p.diffusion = [](const Point&) { return Tensor::Identity(); };
  p.source = [C](const Point&) { return C; };
  p.barrier = [](const Point& x) {
    return -std::min({x.x(), 1.0 - x.x(), x.y(), 1.0 - x.y()});
  };
  p.sense = BarrierSense::Lower;
  return tc;
}

TestCase make_case(const std::string& name, double C) {
  if (name == "test1") return test1_signorini();
  if (name == "test2") return test2_signorini_exact();
  if (name == "test3") return test3_obstacle(C);
  throw CaseError("unknown case '" + name + "' (expected test1, test2 or test3)");
}

ManufacturedCheck manufactured_check(const TestCase& tc, std::size_t points, double tol, unsigned seed) {
  ManufacturedCheck out;
  const auto& ex = tc.problem.exact;
  if (!ex || !ex->flux) return out;
  std::mt19937 rng(seed);
  const double e = 1e-3;
  // fourth-order central difference
  const auto diff = [e](const std::function<double(double)>& g, double t) {
    return (-g(t + 2 * e) + 8 * g(t + e) - 8 * g(t - e) + g(t - 2 * e)) / (12 * e);
  };
  for (const Subdomain& s : tc.subdomains) {
    const double m = 2.5 * e;
    std::uniform_real_distribution<double> ux(s.x0 + m, s.x1 - m), uy(s.y0 + m, s.y1 - m);
    for (std::size_t i = 0; i < points; ++i) {
      const Point x(ux(rng), uy(rng));
      const double dpx = diff([&](double t) { return ex->flux(Point(t, x.y())).x(); }, x.x());
      const double dpy = diff([&](double t) { return ex->flux(Point(x.x(), t)).y(); }, x.y());
      const double f = tc.problem.source(x);
      const double r = ex->residual ? ex->residual(x) : 0.0;
      const double err = std::abs(dpx + dpy + f - r) / std::max(1.0, std::abs(f));
      out.max_error = std::max(out.max_error, err);
      ++out.points;
    }
  }
  out.passed = out.max_error <= tol;
  return out;
}

}  // namespace vgs
