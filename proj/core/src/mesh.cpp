#include "vgs/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace vgs {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

// Orders the faces of one cell into a closed vertex loop. Returns the loop
// and, for every loop edge, the index into `cell_faces`.
void chain_cell(std::size_t cell_index, const std::vector<std::array<std::size_t, 2>>& faces,
                const std::vector<std::size_t>& cell_faces, std::vector<std::size_t>& loop,
                std::vector<std::size_t>& edge_faces) {
  const std::size_t m = cell_faces.size();
  if (m < 3) {
    throw MeshError("cell " + std::to_string(cell_index) + " has fewer than 3 faces");
  }
  std::vector<char> used(m, 0);
  loop.clear();
  edge_faces.clear();
  loop.push_back(faces[cell_faces[0]][0]);
  std::size_t current = faces[cell_faces[0]][1];
  used[0] = 1;
  edge_faces.push_back(cell_faces[0]);
  for (std::size_t step = 1; step < m; ++step) {
    loop.push_back(current);
    bool found = false;
    for (std::size_t k = 0; k < m; ++k) {
      if (used[k]) continue;
      const auto& fv = faces[cell_faces[k]];
      if (fv[0] == current || fv[1] == current) {
        used[k] = 1;
        edge_faces.push_back(cell_faces[k]);
        current = (fv[0] == current) ? fv[1] : fv[0];
        found = true;
        break;
      }
    }
    if (!found) {
      throw MeshError("faces of cell " + std::to_string(cell_index) +
                      " do not form a closed polygon");
    }
  }
  if (current != loop.front()) {
    throw MeshError("faces of cell " + std::to_string(cell_index) +
                    " do not form a closed polygon");
  }
}

}  // namespace

PolytopalMesh PolytopalMesh::from_topology(std::vector<Point> vertices,
                                           const std::vector<std::array<std::size_t, 2>>& faces,
                                           const std::vector<std::vector<std::size_t>>& cells) {
  MeshData data;
  data.vertices = std::move(vertices);
  const std::size_t nv = data.vertices.size();

  data.faces.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto [a, b] = faces[f];
    if (a >= nv || b >= nv) {
      throw MeshError("face " + std::to_string(f) + " references a missing vertex");
    }
    if (a == b) throw MeshError("face " + std::to_string(f) + " has identical end points");
    Face& face = data.faces[f];
    face.vertices = {a, b};
    face.measure = (data.vertices[b] - data.vertices[a]).norm();
    face.diameter = face.measure;
    face.centroid = 0.5 * (data.vertices[a] + data.vertices[b]);
  }

  data.cells.resize(cells.size());
  std::vector<std::size_t> loop;
  std::vector<std::size_t> edge_faces;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    for (std::size_t f : cells[k]) {
      if (f >= faces.size()) {
        throw MeshError("cell " + std::to_string(k) + " references a missing face");
      }
    }
    chain_cell(k, faces, cells[k], loop, edge_faces);

    double signed_area = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      signed_area += cross(data.vertices[loop[i]], data.vertices[loop[(i + 1) % loop.size()]]);
    }
    if (signed_area < 0.0) {
      std::reverse(loop.begin(), loop.end());
      // edge i joins loop[i] and loop[i+1]; reversing shifts the pairing
      std::reverse(edge_faces.begin(), edge_faces.end());
      std::rotate(edge_faces.begin(), edge_faces.begin() + 1, edge_faces.end());
    }

    Cell& cell = data.cells[k];
    cell.vertices = loop;
    const std::size_t m = loop.size();
    // centroid via a fan around the first vertex (signed, so non-convex
    // polygons are handled)
    double area = 0.0;
    Point moment = Point::Zero();
    const Point& p0 = data.vertices[loop[0]];
    for (std::size_t i = 1; i + 1 < m; ++i) {
      const Point& p1 = data.vertices[loop[i]];
      const Point& p2 = data.vertices[loop[i + 1]];
      const double a = 0.5 * cross(p1 - p0, p2 - p0);
      area += a;
      moment += a * (p0 + p1 + p2) / 3.0;
    }
    cell.measure = area;
    cell.centre = area != 0.0 ? Point(moment / area) : p0;

    double diam = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        diam = std::max(diam, (data.vertices[loop[i]] - data.vertices[loop[j]]).norm());
    cell.diameter = diam;
    data.size = std::max(data.size, diam);

    cell.faces.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const Point& a = data.vertices[loop[i]];
      const Point& b = data.vertices[loop[(i + 1) % m]];
      const Point t = b - a;
      const double len = t.norm();
      CellFace& cf = cell.faces[i];
      cf.face = edge_faces[i];
      cf.normal = len > 0.0 ? Point(Point(t.y(), -t.x()) / len) : Point(Point::Zero());
      cf.distance = (data.faces[cf.face].centroid - cell.centre).dot(cf.normal);

      Face& face = data.faces[cf.face];
      if (face.cells[0] < 0) {
        face.cells[0] = static_cast<long>(k);
      } else if (face.cells[1] < 0) {
        face.cells[1] = static_cast<long>(k);
      } else {
        throw MeshError("face " + std::to_string(cf.face) + " is shared by more than two cells");
      }
    }
  }
  for (std::size_t f = 0; f < data.faces.size(); ++f) {
    if (data.faces[f].cells[0] < 0) {
      throw MeshError("face " + std::to_string(f) + " belongs to no cell");
    }
  }
  return PolytopalMesh(std::move(data));
}

PolytopalMesh PolytopalMesh::from_polygons(std::vector<Point> vertices,
                                           const std::vector<std::vector<std::size_t>>& cells) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_index;
  std::vector<std::array<std::size_t, 2>> faces;
  std::vector<std::vector<std::size_t>> cell_faces(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto& loop = cells[k];
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const std::size_t a = loop[i];
      const std::size_t b = loop[(i + 1) % loop.size()];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, faces.size());
      if (inserted) faces.push_back({a, b});
      cell_faces[k].push_back(it->second);
    }
  }
  return from_topology(std::move(vertices), faces, cell_faces);
}

PolytopalMesh PolytopalMesh::from_data(MeshData data) { return PolytopalMesh(std::move(data)); }

std::vector<std::size_t> PolytopalMesh::boundary_faces() const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < data_.faces.size(); ++f)
    if (data_.faces[f].is_boundary()) out.push_back(f);
  return out;
}

double PolytopalMesh::total_measure() const {
  double s = 0.0;
  for (const auto& c : data_.cells) s += c.measure;
  return s;
}

// ---------------------------------------------------------------------------

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : MeshError([&] {
        std::ostringstream os;
        os << "mesh validation failed (" << diagnostics.size() << " issue"
           << (diagnostics.size() == 1 ? "" : "s") << ")";
        for (std::size_t i = 0; i < diagnostics.size() && i < 5; ++i)
          os << "; " << diagnostics[i].message;
        return os.str();
      }()),
      diagnostics_(std::move(diagnostics)) {}

std::vector<Diagnostic> validate(const PolytopalMesh& mesh, const ValidationOptions& options) {
  std::vector<Diagnostic> out;
  const auto add = [&out](std::string check, EntityKind kind, std::size_t index, double value,
                          const std::string& what) {
    out.push_back({std::move(check), kind, index, value, what});
  };
  const auto& faces = mesh.faces();
  const auto& cells = mesh.cells();

  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    if (!(face.measure > 0.0)) {
      add("face-measure", EntityKind::Face, f, face.measure,
          "face " + std::to_string(f) + " has zero measure");
    }
    if (face.cells[0] < 0) {
      add("adjacency", EntityKind::Face, f, 0.0,
          "face " + std::to_string(f) + " has no incident cell");
    }
  }

  // per-face record of the outward normals seen from each incident cell
  std::vector<std::vector<Point>> seen(faces.size());
  double total = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Cell& cell = cells[k];
    const std::string cname = "cell " + std::to_string(k);
    if (!(cell.measure > 0.0)) {
      add("cell-measure", EntityKind::Cell, k, cell.measure, cname + " has non-positive measure");
    }
    total += cell.measure;
    Point normal_sum = Point::Zero();
    double reconstructed = 0.0;
    for (const CellFace& cf : cell.faces) {
      if (cf.face >= faces.size()) {
        add("adjacency", EntityKind::Cell, k, 0.0, cname + " references a missing face");
        continue;
      }
      const double s = faces[cf.face].measure;
      normal_sum += s * cf.normal;
      reconstructed += s * (faces[cf.face].centroid - cell.centre).dot(cf.normal);
      if (!(cf.distance > 0.0)) {
        add("star-shaped", EntityKind::Cell, k, cf.distance,
            cname + " is not strictly star-shaped with respect to its centre (face " +
                std::to_string(cf.face) + ")");
      }
      seen[cf.face].push_back(cf.normal);
    }
    if (!(normal_sum.norm() <= options.normal_sum_tol)) {
      add("normal-sum", EntityKind::Cell, k, normal_sum.norm(),
          cname + ": sum of |sigma| n_K,sigma does not vanish");
    }
    reconstructed *= 0.5;
    if (!(std::abs(reconstructed - cell.measure) <=
          options.measure_rel_tol * std::max(std::abs(cell.measure), 1e-300))) {
      add("measure-identity", EntityKind::Cell, k, reconstructed - cell.measure,
          cname + ": |K| differs from the face-distance formula");
    }
  }

  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    const std::size_t expected = face.is_boundary() ? 1 : 2;
    if (seen[f].size() != expected) {
      add("adjacency", EntityKind::Face, f, static_cast<double>(seen[f].size()),
          "face " + std::to_string(f) + " listed by " + std::to_string(seen[f].size()) +
              " cells");
      continue;
    }
    if (expected == 2 && !((seen[f][0] + seen[f][1]).norm() <= options.normal_sum_tol)) {
      add("normal-opposition", EntityKind::Face, f, (seen[f][0] + seen[f][1]).norm(),
          "face " + std::to_string(f) + ": normals of its two cells are not opposite");
    }
  }

  if (options.domain_measure) {
    const double dm = *options.domain_measure;
    if (!(std::abs(total - dm) <= options.measure_rel_tol * std::abs(dm))) {
      add("domain-measure", EntityKind::Mesh, 0, total - dm,
          "cell measures do not add up to the domain measure");
    }
  }
  return out;
}

void require_valid(const PolytopalMesh& mesh, const ValidationOptions& options) {
  auto diagnostics = validate(mesh, options);
  if (!diagnostics.empty()) throw ValidationError(std::move(diagnostics));
}

// ---------------------------------------------------------------------------

std::size_t BoundaryTags::count(Gamma g) const {
  return static_cast<std::size_t>(std::count(tags_.begin(), tags_.end(), g));
}

std::vector<std::size_t> BoundaryTags::faces_on(Gamma g) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < tags_.size(); ++f)
    if (tags_[f] == g) out.push_back(f);
  return out;
}

BoundaryTags tag_boundary(const PolytopalMesh& mesh, const BoundaryClassifier& classifier) {
  // Samples stay a hair inside the face so that corner vertices, which
  // belong to two sides, do not trigger false straddling reports.
  static constexpr std::array<double, 5> kSamples = {1e-6, 0.25, 0.5, 0.75, 1.0 - 1e-6};
  std::vector<Gamma> tags(mesh.num_faces(), Gamma::None);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(f);
    if (!face.is_boundary()) continue;
    const Point& a = mesh.vertex(face.vertices[0]);
    const Point& b = mesh.vertex(face.vertices[1]);
    const Gamma g = classifier(face.centroid);
    if (g == Gamma::None) {
      throw TaggingError(f, "boundary face " + std::to_string(f) + " left unclassified");
    }
    for (double t : kSamples) {
      if (classifier((1.0 - t) * a + t * b) != g) {
        throw TaggingError(f, "boundary face " + std::to_string(f) +
                                  " straddles two boundary parts");
      }
    }
    tags[f] = g;
  }
  return BoundaryTags(std::move(tags));
}

}  // namespace vgs
