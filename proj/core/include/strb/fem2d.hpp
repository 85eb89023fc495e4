#pragma once

#include <array>
#include <functional>
#include <vector>

#include "strb/linalg.hpp"

/// P1 finite elements on rectangles in (log-price, volatility) coordinates.
namespace strb::fem2d {

struct Point2 {
  double y = 0.0;   ///< log-price
  double nu = 0.0;  ///< volatility
};

struct Rectangle {
  double y_min = 0.0;
  double y_max = 1.0;
  double nu_min = 0.0;
  double nu_max = 1.0;

  double width() const { return y_max - y_min; }
  double height() const { return nu_max - nu_min; }
  double area() const { return width() * height(); }
};

/// Tensor-product rectangle mesh, every cell split into two triangles along
/// the diagonal from its lower-left to its upper-right corner. Boundary
/// vertices carry homogeneous Dirichlet conditions and get no dof.
class SpatialMesh {
 public:
  static constexpr int kBoundary = -1;

  /// Mesh whose cells are bounded by the given (strictly increasing) lines.
  SpatialMesh(std::vector<double> y_lines, std::vector<double> nu_lines);

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<double>& y_lines() const { return y_lines_; }
  const std::vector<double>& nu_lines() const { return nu_lines_; }
  Rectangle domain() const;

  int nx() const { return static_cast<int>(y_lines_.size()) - 1; }
  int ny() const { return static_cast<int>(nu_lines_.size()) - 1; }

  /// Number of interior (free) dofs, J.
  int num_dofs() const { return static_cast<int>(dof_vertex_.size()); }
  /// Dof index of a vertex, or kBoundary.
  int dof_of(int vertex) const { return vertex_dof_[static_cast<std::size_t>(vertex)]; }
  int vertex_of(int dof) const { return dof_vertex_[static_cast<std::size_t>(dof)]; }
  int vertex_index(int iy, int inu) const { return inu * (nx() + 1) + iy; }

  double signed_area(int triangle) const;

 private:
  std::vector<double> y_lines_;
  std::vector<double> nu_lines_;
  std::vector<Point2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<int> vertex_dof_;
  std::vector<int> dof_vertex_;
};

/// Uniform nx-by-ny mesh of `domain`: (nx+1)(ny+1) vertices, 2 nx ny triangles
/// and J = (nx-1)(ny-1) interior dofs.
SpatialMesh build_rect_mesh(const Rectangle& domain, int nx, int ny);

/// Lines for a mesh in which every interior knot is a mesh line. Cells are
/// distributed over knot intervals proportionally to `weights` (one weight per
/// interval; empty means proportional to interval length), at least
/// `min_cells` per interval, `total_cells` in all (best effort).
std::vector<double> knot_aligned_lines(const std::vector<double>& knots, int total_cells,
                                       const std::vector<double>& weights = {},
                                       int min_cells = 1);

/// Uniformly spaced lines including both end points.
std::vector<double> uniform_lines(double lo, double hi, int cells);

struct HestonCoefficients {
  double kappa = 0.8;
  double theta = 0.2;
  double sigma = 0.6;
  double r = 0.001;

  void validate() const;
};

/// Pointwise coefficients of a(u, v) = int alpha grad u . grad v + beta . grad u v + gamma u v.
struct FormCoefficients {
  std::array<std::array<double, 2>, 2> diffusion{};  ///< alpha
  std::array<double, 2> convection{};                ///< beta
  double reaction = 0.0;                             ///< gamma
};

using CoefficientField = std::function<FormCoefficients(const Point2&)>;

/// Assembles the J x J operator matrix S with S(j, i) = a(phi_i, phi_j): rows
/// index test functions, so S * u is the functional a(u, .). Integrals use the
/// three edge-midpoint rule, exact for quadratic integrands.
/// `include`, when set, selects the triangles that take part.
SparseMatrix assemble_operator(const SpatialMesh& mesh, const CoefficientField& coefficients,
                               const std::function<bool(int)>& include = {});

/// L2 mass matrix (phi_i, phi_j).
SparseMatrix assemble_mass(const SpatialMesh& mesh);
/// Laplace stiffness matrix (grad phi_i, grad phi_j).
SparseMatrix assemble_stiffness(const SpatialMesh& mesh);
/// Gramian of the full H1 inner product: stiffness + mass.
SparseMatrix assemble_v_gramian(const SpatialMesh& mesh);
/// Integrals of the interior basis functions, int phi_j.
Vector integrate_basis(const SpatialMesh& mesh);

/// A(rho) = sum_q theta_q(rho) A_q, every A_q in the operator convention of
/// assemble_operator.
struct AffineSpatialForms {
  std::vector<SparseMatrix> matrices;
  std::vector<ThetaId> thetas;

  std::size_t num_terms() const { return matrices.size(); }
  Eigen::Index dim() const { return matrices.empty() ? 0 : matrices.front().rows(); }
};

/// Heston diffusion/convection/reaction coefficients at correlation rho.
FormCoefficients heston_coefficients(const HestonCoefficients& c, double rho, const Point2& x);

/// The two rho-separable Heston terms: A_1 collects everything independent of
/// the correlation (theta = 1), A_2 the cross diffusion nu sigma / 2 and the
/// drift correction sigma / 2 in the log-price direction (theta = rho).
AffineSpatialForms assemble_heston_affine(const SpatialMesh& mesh, const HestonCoefficients& c);

SparseMatrix evaluate_affine(const AffineSpatialForms& forms, double rho);

/// Generic stability data of a spatial form; see rbm::infsup_lower_bound.
struct StabilityConstants {
  double continuity = 1.0;         ///< M_a
  double garding_alpha = 1.0;      ///< alpha_a
  double garding_lambda = 0.0;     ///< lambda_a
  double initial_trace = 0.0;      ///< M_e
  double embedding = 1.0;          ///< varrho, ||phi||_H <= varrho ||phi||_V
  double spatial_infsup = 1.0;     ///< beta_a^*
};

/// Discrete embedding constant sup ||phi||_H / ||phi||_V over the mesh space,
/// by power iteration on G^{-1} M.
double embedding_constant(const SparseMatrix& mass, const SparseMatrix& v_gramian,
                          int iterations = 200);

/// Mass and V-Gramian of the sub-rectangle covered by the triangles lying
/// inside `window`, on the dofs that touch it.
struct WindowMatrices {
  std::vector<int> dofs;
  SparseMatrix mass;
  SparseMatrix v_gramian;

  Vector restrict(const Vector& full) const;
};

WindowMatrices window_matrices(const SpatialMesh& mesh, const Rectangle& window);

/// Values of a vertex field on the dofs (boundary vertices dropped).
Vector restrict_to_dofs(const SpatialMesh& mesh, const std::function<double(const Point2&)>& f);
/// Vertex values of a dof vector (boundary vertices zero).
Vector extend_to_vertices(const SpatialMesh& mesh, const Vector& dofs);

}  // namespace strb::fem2d
