#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <locale>
#include <sstream>

#include "vgs/cases.hpp"

namespace vgs {

namespace {

// blue -> white -> red
std::string colour(double t) {
  t = std::clamp(t, 0.0, 1.0);
  double r, g, b;
  if (t < 0.5) {
    const double s = 2.0 * t;
    r = 0.23 + s * (0.87 - 0.23);
    g = 0.30 + s * (0.87 - 0.30);
    b = 0.75 + s * (0.87 - 0.75);
  } else {
    const double s = 2.0 * (t - 0.5);
    r = 0.87 + s * (0.71 - 0.87);
    g = 0.87 + s * (0.02 - 0.87);
    b = 0.87 + s * (0.15 - 0.87);
  }
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(std::lround(255 * r)),
                static_cast<int>(std::lround(255 * g)), static_cast<int>(std::lround(255 * b)));
  return buf;
}

}  // namespace

std::string contour_svg(const PolytopalMesh& mesh, const std::vector<double>& field,
                        const std::vector<Point>& overlay) {
  if (field.size() != mesh.num_cells()) throw CaseError("field needs one value per cell");
  for (std::size_t k = 0; k < field.size(); ++k) {
    if (!std::isfinite(field[k])) throw CaseError("field value of cell " + std::to_string(k) + " is not finite");
  }
  const double lo = field.empty() ? 0.0 : *std::min_element(field.begin(), field.end());
  const double hi = field.empty() ? 0.0 : *std::max_element(field.begin(), field.end());
  const double span = hi - lo;

  Point pmin(0.0, 0.0), pmax(1.0, 1.0);
  for (const Point& v : mesh.vertices()) {
    pmin = pmin.cwiseMin(v);
    pmax = pmax.cwiseMax(v);
  }
  const double w = pmax.x() - pmin.x();
  const double h = pmax.y() - pmin.y();
  const double legend = 0.12 * h;

  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(8);
  // y is flipped so that the domain appears with y pointing up
  const auto px = [&](const Point& p) { return p.x(); };
  const auto py = [&](const Point& p) { return pmax.y() + pmin.y() - p.y(); };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << w << ' ' << h + legend
     << "\" width=\"600\" height=\"" << std::lround(600 * (h + legend) / w) << "\">\n";
  os << "<svg x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"" << pmin.x() << ' '
     << pmin.y() << ' ' << w << ' ' << h << "\">\n";
  os << "<g stroke=\"#333333\" stroke-width=\"" << 0.0008 * w << "\">\n";
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const double t = span > 0.0 ? (field[k] - lo) / span : 0.5;
    os << "<polygon fill=\"" << colour(t) << "\" points=\"";
    const auto& loop = mesh.cell(k).vertices;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const Point& v = mesh.vertex(loop[i]);
      os << (i ? " " : "") << px(v) << ',' << py(v);
    }
    os << "\"/>\n";
  }
  os << "</g>\n";
  if (overlay.size() >= 2) {
    os << "<polyline fill=\"none\" stroke=\"#000000\" stroke-width=\"" << 0.004 * w << "\" points=\"";
    for (std::size_t i = 0; i < overlay.size(); ++i) os << (i ? " " : "") << px(overlay[i]) << ',' << py(overlay[i]);
    os << "\"/>\n";
  }
  os << "</svg>\n";
  // legend: colour bar with min and max labels, in outer coordinates
  const double y0 = h + 0.03 * h;
  const int steps = 32;
  for (int i = 0; i < steps; ++i) {
    os << "<rect x=\"" << 0.3 * w + 0.4 * w * i / steps << "\" y=\"" << y0 << "\" width=\""
       << 0.4 * w / steps + 1e-4 << "\" height=\"" << 0.04 * h << "\" fill=\""
       << colour((i + 0.5) / steps) << "\"/>\n";
  }
  const double fs = 0.035 * h;
  os << "<text x=\"" << 0.28 * w << "\" y=\"" << y0 + 0.035 * h << "\" font-size=\"" << fs
     << "\" text-anchor=\"end\">min " << format_number(lo) << "</text>\n";
  os << "<text x=\"" << 0.72 * w << "\" y=\"" << y0 + 0.035 * h << "\" font-size=\"" << fs
     << "\">max " << format_number(hi) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void emit_contour_svg(const PolytopalMesh& mesh, const std::vector<double>& field,
                      const std::filesystem::path& path, const std::vector<Point>& overlay) {
  const std::string svg = contour_svg(mesh, field, overlay);
  std::ofstream out(path);
  if (!out) throw CaseError("cannot write " + path.string());
  out << svg;
  if (!out) throw CaseError("write failed for " + path.string());
}

}  // namespace vgs
