#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace vgs {

using Point = Eigen::Vector2d;
using Tensor = Eigen::Matrix2d;

/// Quadrature node in barycentric coordinates of a triangle, weight relative
/// to the triangle area (weights sum to 1).
struct TriangleNode {
  std::array<double, 3> bary;
  double weight;
};

/// Quadrature node on a segment, parameter t in [0,1], weight relative to
/// the segment length.
struct SegmentNode {
  double t;
  double weight;
};

/// Symmetric triangle rules. Degree 2 uses three interior points, degree 5 the
/// seven-point Dunavant rule. Any other degree is rounded up to one of these.
std::span<const TriangleNode> triangle_rule(int degree);

/// Gauss-Legendre rules on [0,1] exact up to `degree`.
std::span<const SegmentNode> segment_rule(int degree);

/// Composite rule: the triangle is split into 4^levels congruent children and
/// `triangle_rule(degree)` is applied on each.
std::vector<TriangleNode> refined_triangle_rule(int degree, int levels);

/// Number of uniform refinement levels requested through VGS_QUAD_REFINE
/// (0 when unset or unparsable).
int quadrature_refinement_from_env();

double triangle_area(const Point& a, const Point& b, const Point& c);

inline Point barycentric_point(const std::array<Point, 3>& tri,
                               const std::array<double, 3>& bary) {
  return bary[0] * tri[0] + bary[1] * tri[1] + bary[2] * tri[2];
}

}  // namespace vgs
