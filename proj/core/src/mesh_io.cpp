#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <locale>
#include <ostream>
#include <sstream>

#include "vgs/mesh.hpp"

namespace vgs {

ParseError::ParseError(std::size_t line, const std::string& what)
    : MeshError("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty line with comments stripped, split into tokens.
  bool next(std::vector<std::string>& tokens) {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      tokens.clear();
      std::istringstream ss(raw);
      std::string t;
      while (ss >> t) tokens.push_back(t);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  std::vector<std::string> require(const char* what) {
    std::vector<std::string> tokens;
    if (!next(tokens)) throw ParseError(line_ + 1, std::string("unexpected end of file, expected ") + what);
    return tokens;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::size_t parse_index(const std::string& s, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, "expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

double parse_real(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(line, "expected a finite number, got '" + s + "'");
  }
  return v;
}

std::size_t parse_section(LineReader& reader, const char* keyword) {
  const auto tokens = reader.require(keyword);
  if (tokens.size() != 2 || tokens[0] != keyword) {
    throw ParseError(reader.line(), std::string("expected '") + keyword + " <count>'");
  }
  return parse_index(tokens[1], reader.line());
}

}  // namespace

LoadedMesh load_mesh(std::istream& in) {
  LineReader reader(in);
  {
    const auto header = reader.require("header");
    if (header.size() != 2 || header[0] != "polymesh" || header[1] != "2") {
      throw ParseError(reader.line(), "expected header 'polymesh 2'");
    }
  }

  const std::size_t nv = parse_section(reader, "vertices");
  std::vector<Point> vertices;
  vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    const auto t = reader.require("vertex");
    if (t.size() != 2) throw ParseError(reader.line(), "vertex line needs two coordinates");
    vertices.emplace_back(parse_real(t[0], reader.line()), parse_real(t[1], reader.line()));
  }

  const std::size_t nf = parse_section(reader, "faces");
  std::vector<std::array<std::size_t, 2>> faces;
  faces.reserve(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    const auto t = reader.require("face");
    if (t.size() != 2) throw ParseError(reader.line(), "face line needs two vertex indices");
    const std::size_t a = parse_index(t[0], reader.line());
    const std::size_t b = parse_index(t[1], reader.line());
    if (a >= nv || b >= nv) throw ParseError(reader.line(), "vertex index out of range");
    faces.push_back({a, b});
  }

  const std::size_t nc = parse_section(reader, "cells");
  std::vector<std::vector<std::size_t>> cells(nc);
  for (std::size_t k = 0; k < nc; ++k) {
    const auto t = reader.require("cell");
    for (const auto& s : t) {
      const std::size_t f = parse_index(s, reader.line());
      if (f >= nf) throw ParseError(reader.line(), "face index out of range");
      cells[k].push_back(f);
    }
    if (cells[k].size() < 3) throw ParseError(reader.line(), "cell needs at least three faces");
  }

  std::optional<std::vector<Gamma>> tags;
  std::vector<std::string> tokens;
  if (reader.next(tokens)) {
    if (tokens.size() != 1 || tokens[0] != "tags") {
      throw ParseError(reader.line(), "expected 'tags' or end of file");
    }
    tags.emplace(nf, Gamma::None);
    while (reader.next(tokens)) {
      if (tokens.size() != 2) throw ParseError(reader.line(), "tag line needs '<face> <tag>'");
      const std::size_t f = parse_index(tokens[0], reader.line());
      const std::size_t g = parse_index(tokens[1], reader.line());
      if (f >= nf) throw ParseError(reader.line(), "face index out of range");
      if (g > 3) throw ParseError(reader.line(), "tag must be 0, 1, 2 or 3");
      (*tags)[f] = static_cast<Gamma>(g);
    }
  }

  LoadedMesh out;
  try {
    out.mesh = PolytopalMesh::from_topology(std::move(vertices), faces, cells);
  } catch (const ParseError&) {
    throw;
  } catch (const MeshError& e) {
    throw ParseError(reader.line(), e.what());
  }
  require_valid(out.mesh);
  if (tags) {
    for (std::size_t f = 0; f < nf; ++f) {
      if ((*tags)[f] != Gamma::None && !out.mesh.face(f).is_boundary()) {
        throw ParseError(reader.line(), "interior face " + std::to_string(f) + " carries a tag");
      }
    }
    out.tags = BoundaryTags(std::move(*tags));
  }
  return out;
}

LoadedMesh load_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  return load_mesh(in);
}

void write_mesh(std::ostream& out, const PolytopalMesh& mesh, const BoundaryTags* tags) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << "polymesh 2\n";
  os << "vertices " << mesh.num_vertices() << '\n';
  for (const auto& v : mesh.vertices()) os << v.x() << ' ' << v.y() << '\n';
  os << "faces " << mesh.num_faces() << '\n';
  for (const auto& f : mesh.faces()) os << f.vertices[0] << ' ' << f.vertices[1] << '\n';
  os << "cells " << mesh.num_cells() << '\n';
  for (const auto& c : mesh.cells()) {
    for (std::size_t i = 0; i < c.faces.size(); ++i) os << (i ? " " : "") << c.faces[i].face;
    os << '\n';
  }
  if (tags != nullptr) {
    os << "tags\n";
    for (std::size_t f = 0; f < tags->size(); ++f)
      if ((*tags)[f] != Gamma::None) os << f << ' ' << static_cast<int>((*tags)[f]) << '\n';
  }
  out << os.str();
}

}  // namespace vgs
