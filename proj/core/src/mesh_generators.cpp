#include <cmath>
#include <numbers>

#include "vgs/mesh.hpp"

namespace vgs {

PolytopalMesh build_triangular_mesh(std::size_t n, TrianglePattern pattern) {
  if (n == 0) throw MeshError("triangular mesh needs n >= 1");
  const std::size_t np = n + 1;
  std::vector<Point> vertices;
  vertices.reserve(np * np + (pattern == TrianglePattern::CrissCross ? n * n : 0));
  for (std::size_t j = 0; j <= n; ++j)
    for (std::size_t i = 0; i <= n; ++i)
      vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  const auto id = [np](std::size_t i, std::size_t j) { return j * np + i; };

  std::vector<std::vector<std::size_t>> cells;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if (pattern == TrianglePattern::Diagonal) {
        cells.push_back({a, b, c});
        cells.push_back({a, c, d});
      } else {
        const std::size_t m = vertices.size();
        vertices.emplace_back((i + 0.5) / n, (j + 0.5) / n);
        cells.push_back({a, b, m});
        cells.push_back({b, c, m});
        cells.push_back({c, d, m});
        cells.push_back({d, a, m});
      }
    }
  }
  return PolytopalMesh::from_polygons(std::move(vertices), cells);
}

PolytopalMesh build_hexagonal_mesh(std::size_t n) {
  if (n == 0) throw MeshError("hexagonal mesh needs n >= 1");
  const std::size_t ny = n;
  const std::size_t nx =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.5 * std::sqrt(3.0) * n)));
  const std::size_t width = 2 * nx;
  const double delta = 1.0 / (6.0 * static_cast<double>(ny));

  // zigzag line k, index i; on the flat lines apex vertices are dropped
  std::vector<Point> vertices;
  std::vector<std::vector<long>> index(ny + 1, std::vector<long>(width + 1, -1));
  for (std::size_t k = 0; k <= ny; ++k) {
    const bool flat = (k == 0 || k == ny);
    const std::size_t row = (k == 0) ? 0 : k - 1;
    for (std::size_t i = 0; i <= width; ++i) {
      if (flat && ((i + row) % 2 == 1) && i > 0 && i < width) continue;
      const double x = static_cast<double>(i) / static_cast<double>(width);
      double y = static_cast<double>(k) / static_cast<double>(ny);
      if (!flat) y += ((i + k) % 2 == 1) ? -delta : delta;
      index[k][i] = static_cast<long>(vertices.size());
      vertices.emplace_back(x, y);
    }
  }

  std::vector<std::vector<std::size_t>> cells;
  const auto push_side = [&](std::vector<std::size_t>& loop, std::size_t k, long i) {
    const long v = index[k][static_cast<std::size_t>(i)];
    if (v >= 0) loop.push_back(static_cast<std::size_t>(v));
  };
  for (std::size_t k = 0; k < ny; ++k) {
    const bool even = (k % 2 == 0);
    const long cmax = even ? static_cast<long>(nx) - 1 : static_cast<long>(nx);
    for (long c = 0; c <= cmax; ++c) {
      long lo = even ? 2 * c : 2 * c - 1;
      long hi = lo + 2;
      lo = std::max<long>(lo, 0);
      hi = std::min<long>(hi, static_cast<long>(width));
      std::vector<std::size_t> loop;
      for (long i = lo; i <= hi; ++i) push_side(loop, k, i);
      for (long i = hi; i >= lo; --i) push_side(loop, k + 1, i);
      cells.push_back(std::move(loop));
    }
  }
  return PolytopalMesh::from_polygons(std::move(vertices), cells);
}

PolytopalMesh build_distorted_quad_mesh(std::size_t n, double amplitude) {
  if (n == 0) throw MeshError("distorted mesh needs n >= 1");
  if (!(amplitude >= 0.0 && amplitude < 1.0)) {
    throw MeshError("distortion amplitude must lie in [0, 1)");
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  constexpr double stripes = 2.0;
  const std::size_t np = n + 1;
  std::vector<Point> vertices;
  vertices.reserve(np * np);
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i <= n; ++i) {
      const double x = static_cast<double>(i) / n;
      const double y0 = static_cast<double>(j) / n;
      double y = y0 + amplitude / two_pi * std::sin(two_pi * y0) * std::cos(two_pi * stripes * x);
      if (j == 0) y = 0.0;
      if (j == n) y = 1.0;
      if (2 * j == n) y = 0.5;
      vertices.emplace_back(x, y);
    }
  }
  std::vector<std::vector<std::size_t>> cells;
  cells.reserve(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      cells.push_back({j * np + i, j * np + i + 1, (j + 1) * np + i + 1, (j + 1) * np + i});
  return PolytopalMesh::from_polygons(std::move(vertices), cells);
}

}  // namespace vgs
