#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vgs/quadrature.hpp"

namespace vgs {

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A face of a two-dimensional polytopal mesh (an edge).
struct Face {
  std::array<std::size_t, 2> vertices{};
  double measure = 0.0;
  Point centroid = Point::Zero();
  double diameter = 0.0;
  /// Incident cells; cells[1] == -1 on boundary faces.
  std::array<long, 2> cells{-1, -1};

  bool is_boundary() const { return cells[1] < 0; }
};

/// A face seen from one of its cells.
struct CellFace {
  std::size_t face = 0;
  Point normal = Point::Zero();  ///< unit normal pointing out of the cell
  double distance = 0.0;         ///< orthogonal distance from the cell centre
};

struct Cell {
  std::vector<CellFace> faces;        ///< in counter-clockwise order
  std::vector<std::size_t> vertices;  ///< counter-clockwise loop
  Point centre = Point::Zero();       ///< x_K, the centroid
  double measure = 0.0;
  double diameter = 0.0;
};

/// Raw storage behind PolytopalMesh. Exposed so that diagnostics can be
/// exercised on deliberately inconsistent data.
struct MeshData {
  std::vector<Point> vertices;
  std::vector<Face> faces;
  std::vector<Cell> cells;
  double size = 0.0;  ///< h_M, the largest cell diameter
};

/// Immutable polytopal mesh of a planar domain: cells are star-shaped polygons
/// with respect to their centroid, faces are segments with one (boundary) or
/// two (interior) incident cells.
class PolytopalMesh {
 public:
  PolytopalMesh() = default;

  /// Builds a mesh from face vertex pairs and per-cell face lists (in any
  /// order). All geometry is recomputed from the coordinates. Throws
  /// MeshError on broken topology (face with more than two cells, cell faces
  /// not forming a closed loop, index out of range).
  static PolytopalMesh from_topology(std::vector<Point> vertices,
                                     const std::vector<std::array<std::size_t, 2>>& faces,
                                     const std::vector<std::vector<std::size_t>>& cells);

  /// Builds a mesh from cell vertex loops; faces are the distinct edges.
  static PolytopalMesh from_polygons(std::vector<Point> vertices,
                                     const std::vector<std::vector<std::size_t>>& cells);

  /// Wraps raw data without recomputing anything.
  static PolytopalMesh from_data(MeshData data);

  const std::vector<Point>& vertices() const { return data_.vertices; }
  const std::vector<Face>& faces() const { return data_.faces; }
  const std::vector<Cell>& cells() const { return data_.cells; }
  const Point& vertex(std::size_t i) const { return data_.vertices[i]; }
  const Face& face(std::size_t i) const { return data_.faces[i]; }
  const Cell& cell(std::size_t i) const { return data_.cells[i]; }
  std::size_t num_vertices() const { return data_.vertices.size(); }
  std::size_t num_faces() const { return data_.faces.size(); }
  std::size_t num_cells() const { return data_.cells.size(); }
  double size() const { return data_.size; }
  const MeshData& data() const { return data_; }

  std::vector<std::size_t> boundary_faces() const;
  double total_measure() const;

 private:
  explicit PolytopalMesh(MeshData data) : data_(std::move(data)) {}
  MeshData data_;
};

// ---------------------------------------------------------------------------
// Validation

enum class EntityKind { Mesh, Cell, Face };

struct Diagnostic {
  std::string check;  ///< short identifier, e.g. "normal-sum"
  EntityKind entity = EntityKind::Mesh;
  std::size_t index = 0;
  double value = 0.0;  ///< the offending quantity
  std::string message;
};

struct ValidationOptions {
  double normal_sum_tol = 1e-12;  ///< absolute
  double measure_rel_tol = 1e-10;
  std::optional<double> domain_measure;  ///< checked against the sum of |K| when set
};

std::vector<Diagnostic> validate(const PolytopalMesh& mesh, const ValidationOptions& options = {});

class ValidationError : public MeshError {
 public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Throws ValidationError when validate() reports anything.
void require_valid(const PolytopalMesh& mesh, const ValidationOptions& options = {});

// ---------------------------------------------------------------------------
// Boundary tagging

enum class Gamma : std::uint8_t { None = 0, Gamma1 = 1, Gamma2 = 2, Gamma3 = 3 };

using BoundaryClassifier = std::function<Gamma(const Point&)>;

/// Per-face boundary part; interior faces carry Gamma::None.
class BoundaryTags {
 public:
  BoundaryTags() = default;
  explicit BoundaryTags(std::vector<Gamma> tags) : tags_(std::move(tags)) {}

  Gamma operator[](std::size_t face) const { return tags_[face]; }
  std::size_t size() const { return tags_.size(); }
  std::size_t count(Gamma g) const;
  std::vector<std::size_t> faces_on(Gamma g) const;
  const std::vector<Gamma>& values() const { return tags_; }

 private:
  std::vector<Gamma> tags_;
};

class TaggingError : public MeshError {
 public:
  TaggingError(std::size_t face, const std::string& what) : MeshError(what), face_(face) {}
  std::size_t face() const { return face_; }

 private:
  std::size_t face_;
};

/// Tags each boundary face by classifying points inside it. A face whose
/// sample points classify differently straddles two parts and is rejected.
BoundaryTags tag_boundary(const PolytopalMesh& mesh, const BoundaryClassifier& classifier);

// ---------------------------------------------------------------------------
// Generators on the unit square

enum class TrianglePattern { Diagonal, CrissCross };

/// n x n squares, each cut by one diagonal (2n^2 cells) or both (4n^2 cells).
PolytopalMesh build_triangular_mesh(std::size_t n, TrianglePattern pattern = TrianglePattern::Diagonal);

/// Staggered rows of hexagons; n rows, cells along the sides are quadrilaterals
/// and along the bottom/top pentagons.
PolytopalMesh build_hexagonal_mesh(std::size_t n);

/// Logically Cartesian n x n quadrilaterals whose vertices are sheared
/// vertically by a sinusoidal profile alternating in vertical stripes.
/// `amplitude` must lie in [0, 1). The lines y = 0, 1/2, 1 stay straight.
PolytopalMesh build_distorted_quad_mesh(std::size_t n, double amplitude);

// ---------------------------------------------------------------------------
// Text format

struct LoadedMesh {
  PolytopalMesh mesh;
  std::optional<BoundaryTags> tags;
};

class ParseError : public MeshError {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads the line-oriented `polymesh 2` format. Geometry is recomputed and
/// the mesh validated; throws ParseError or ValidationError.
LoadedMesh load_mesh(std::istream& in);
LoadedMesh load_mesh_file(const std::string& path);

void write_mesh(std::ostream& out, const PolytopalMesh& mesh,
                const BoundaryTags* tags = nullptr);

}  // namespace vgs
