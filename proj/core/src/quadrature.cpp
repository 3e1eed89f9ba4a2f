#include "vgs/quadrature.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace vgs {

namespace {

const std::array<TriangleNode, 3> kTriangleDegree2 = {{
    {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}, 1.0 / 3.0},
}};

std::array<TriangleNode, 7> make_dunavant5() {
  const double s15 = std::sqrt(15.0);
  const double a = (6.0 - s15) / 21.0;
  const double b = (6.0 + s15) / 21.0;
  const double wa = (155.0 - s15) / 1200.0;
  const double wb = (155.0 + s15) / 1200.0;
  return {{
      {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 9.0 / 40.0},
      {{a, a, 1.0 - 2.0 * a}, wa},
      {{a, 1.0 - 2.0 * a, a}, wa},
      {{1.0 - 2.0 * a, a, a}, wa},
      {{b, b, 1.0 - 2.0 * b}, wb},
      {{b, 1.0 - 2.0 * b, b}, wb},
      {{1.0 - 2.0 * b, b, b}, wb},
  }};
}

const std::array<TriangleNode, 7> kTriangleDegree5 = make_dunavant5();

const std::array<SegmentNode, 1> kGauss1 = {{{0.5, 1.0}}};

const std::array<SegmentNode, 2> kGauss2 = {{
    {0.5 - 0.5 / std::sqrt(3.0), 0.5},
    {0.5 + 0.5 / std::sqrt(3.0), 0.5},
}};

const std::array<SegmentNode, 3> kGauss3 = {{
    {0.5 - 0.5 * std::sqrt(0.6), 5.0 / 18.0},
    {0.5, 8.0 / 18.0},
    {0.5 + 0.5 * std::sqrt(0.6), 5.0 / 18.0},
}};

}  // namespace

std::span<const TriangleNode> triangle_rule(int degree) {
  if (degree <= 2) return kTriangleDegree2;
  return kTriangleDegree5;
}

std::span<const SegmentNode> segment_rule(int degree) {
  if (degree <= 1) return kGauss1;
  if (degree <= 3) return kGauss2;
  return kGauss3;
}

std::vector<TriangleNode> refined_triangle_rule(int degree, int levels) {
  using Bary = std::array<double, 3>;
  using Tri = std::array<Bary, 3>;
  std::vector<Tri> tris = {Tri{Bary{1, 0, 0}, Bary{0, 1, 0}, Bary{0, 0, 1}}};
  const auto mid = [](const Bary& p, const Bary& q) {
    return Bary{0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])};
  };
  for (int l = 0; l < levels; ++l) {
    std::vector<Tri> next;
    next.reserve(4 * tris.size());
    for (const auto& t : tris) {
      const Bary m01 = mid(t[0], t[1]);
      const Bary m12 = mid(t[1], t[2]);
      const Bary m20 = mid(t[2], t[0]);
      next.push_back({t[0], m01, m20});
      next.push_back({m01, t[1], m12});
      next.push_back({m20, m12, t[2]});
      next.push_back({m01, m12, m20});
    }
    tris = std::move(next);
  }
  const auto base = triangle_rule(degree);
  std::vector<TriangleNode> out;
  out.reserve(tris.size() * base.size());
  const double scale = 1.0 / static_cast<double>(tris.size());
  for (const auto& t : tris) {
    for (const auto& node : base) {
      Bary b{0, 0, 0};
      for (int k = 0; k < 3; ++k)
        for (int c = 0; c < 3; ++c) b[c] += node.bary[k] * t[k][c];
      out.push_back({b, node.weight * scale});
    }
  }
  return out;
}

int quadrature_refinement_from_env() {
  const char* env = std::getenv("VGS_QUAD_REFINE");
  if (env == nullptr) return 0;
  try {
    const int v = std::stoi(env);
    return v < 0 ? 0 : (v > 6 ? 6 : v);
  } catch (...) {
    return 0;
  }
}

double triangle_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * std::abs((b.x() - a.x()) * (c.y() - a.y()) -
                        (c.x() - a.x()) * (b.y() - a.y()));
}

}  // namespace vgs
