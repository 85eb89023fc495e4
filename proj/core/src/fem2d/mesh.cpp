#include <algorithm>
#include <cmath>
#include <numeric>

#include "strb/error.hpp"
#include "strb/fem2d.hpp"

namespace strb::fem2d {

namespace {

void check_lines(const std::vector<double>& lines, const char* axis) {
  require(lines.size() >= 2, std::string("mesh needs at least two ") + axis + " lines");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    require(std::isfinite(lines[i]) && lines[i] > lines[i - 1],
            std::string(axis) + " lines must be finite and strictly increasing (degenerate domain)");
  }
}

}  // namespace

SpatialMesh::SpatialMesh(std::vector<double> y_lines, std::vector<double> nu_lines)
    : y_lines_(std::move(y_lines)), nu_lines_(std::move(nu_lines)) {
  check_lines(y_lines_, "y");
  check_lines(nu_lines_, "nu");
  const int nx = this->nx();
  const int ny = this->ny();
  require((nx - 1) * (ny - 1) > 0, "mesh has no interior dofs");

  vertices_.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  vertex_dof_.reserve(vertices_.capacity());
  for (int inu = 0; inu <= ny; ++inu) {
    for (int iy = 0; iy <= nx; ++iy) {
      vertices_.push_back({y_lines_[static_cast<std::size_t>(iy)], nu_lines_[static_cast<std::size_t>(inu)]});
      const bool boundary = iy == 0 || iy == nx || inu == 0 || inu == ny;
      if (boundary) {
        vertex_dof_.push_back(kBoundary);
      } else {
        vertex_dof_.push_back(static_cast<int>(dof_vertex_.size()));
        dof_vertex_.push_back(static_cast<int>(vertices_.size()) - 1);
      }
    }
  }

  triangles_.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int inu = 0; inu < ny; ++inu) {
    for (int iy = 0; iy < nx; ++iy) {
      const int v00 = vertex_index(iy, inu);
      const int v10 = vertex_index(iy + 1, inu);
      const int v01 = vertex_index(iy, inu + 1);
      const int v11 = vertex_index(iy + 1, inu + 1);
      triangles_.push_back({v00, v10, v11});
      triangles_.push_back({v00, v11, v01});
    }
  }
}

Rectangle SpatialMesh::domain() const {
  return {y_lines_.front(), y_lines_.back(), nu_lines_.front(), nu_lines_.back()};
}

double SpatialMesh::signed_area(int triangle) const {
  const auto& t = triangles_[static_cast<std::size_t>(triangle)];
  const Point2& a = vertices_[static_cast<std::size_t>(t[0])];
  const Point2& b = vertices_[static_cast<std::size_t>(t[1])];
  const Point2& c = vertices_[static_cast<std::size_t>(t[2])];
  return 0.5 * ((b.y - a.y) * (c.nu - a.nu) - (c.y - a.y) * (b.nu - a.nu));
}

std::vector<double> uniform_lines(double lo, double hi, int cells) {
  require(cells >= 1, "cell count must be positive");
  require(std::isfinite(lo) && std::isfinite(hi) && hi > lo, "degenerate interval");
  std::vector<double> lines(static_cast<std::size_t>(cells) + 1);
  for (int i = 0; i <= cells; ++i) {
    lines[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / cells;
  }
  lines.back() = hi;
  return lines;
}

SpatialMesh build_rect_mesh(const Rectangle& domain, int nx, int ny) {
  require(std::isfinite(domain.width()) && domain.width() > 0.0 &&
              std::isfinite(domain.height()) && domain.height() > 0.0,
          "degenerate domain (zero width or height)");
  require(nx >= 1 && ny >= 1, "cell counts must be positive");
  require(nx >= 2 && ny >= 2, "mesh has no interior dofs");
  return SpatialMesh(uniform_lines(domain.y_min, domain.y_max, nx),
                     uniform_lines(domain.nu_min, domain.nu_max, ny));
}

std::vector<double> knot_aligned_lines(const std::vector<double>& knots, int total_cells,
                                       const std::vector<double>& weights, int min_cells) {
  require(knots.size() >= 2, "need at least two knots");
  const std::size_t intervals = knots.size() - 1;
  for (std::size_t i = 0; i < intervals; ++i) {
    require(knots[i + 1] > knots[i], "knots must be strictly increasing");
  }
  std::vector<double> w(intervals);
  if (weights.empty()) {
    for (std::size_t i = 0; i < intervals; ++i) w[i] = knots[i + 1] - knots[i];
  } else {
    require(weights.size() == intervals, "one weight per knot interval expected");
    w = weights;
  }
  const double total_weight = std::accumulate(w.begin(), w.end(), 0.0);
  require(total_weight > 0.0, "weights must not all vanish");

  std::vector<double> lines{knots.front()};
  for (std::size_t i = 0; i < intervals; ++i) {
    const int cells = std::max(min_cells, static_cast<int>(std::lround(total_cells * w[i] / total_weight)));
    const auto piece = uniform_lines(knots[i], knots[i + 1], std::max(1, cells));
    lines.insert(lines.end(), piece.begin() + 1, piece.end());
  }
  return lines;
}

void HestonCoefficients::validate() const {
  require(std::isfinite(kappa) && kappa > 0.0, "kappa must be positive");
  require(std::isfinite(theta) && theta > 0.0, "theta must be positive");
  require(std::isfinite(sigma) && sigma >= 0.0, "sigma must be non-negative");
  require(std::isfinite(r), "r must be finite");
}

Vector restrict_to_dofs(const SpatialMesh& mesh, const std::function<double(const Point2&)>& f) {
  Vector values(mesh.num_dofs());
  for (int j = 0; j < mesh.num_dofs(); ++j) {
    values[j] = f(mesh.vertices()[static_cast<std::size_t>(mesh.vertex_of(j))]);
  }
  return values;
}

Vector extend_to_vertices(const SpatialMesh& mesh, const Vector& dofs) {
  require(dofs.size() == mesh.num_dofs(), "dof vector has wrong length");
  Vector values = Vector::Zero(static_cast<Eigen::Index>(mesh.vertices().size()));
  for (int j = 0; j < mesh.num_dofs(); ++j) values[mesh.vertex_of(j)] = dofs[j];
  return values;
}

}  // namespace strb::fem2d
