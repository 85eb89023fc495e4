#include <algorithm>
#include <cmath>

#include "strb/error.hpp"
#include "strb/fem2d.hpp"

namespace strb::fem2d {

namespace {

struct LocalGeometry {
  std::array<Point2, 3> corners;
  std::array<std::array<double, 2>, 3> grad;  // gradients of the barycentric coordinates
  double area = 0.0;
};

LocalGeometry local_geometry(const SpatialMesh& mesh, int t) {
  LocalGeometry g;
  const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
  for (int a = 0; a < 3; ++a) g.corners[a] = mesh.vertices()[static_cast<std::size_t>(tri[a])];
  g.area = mesh.signed_area(t);
  if (!(g.area > 0.0)) throw NumericalError("triangle with non-positive area");
  const double inv = 1.0 / (2.0 * g.area);
  for (int a = 0; a < 3; ++a) {
    const Point2& p = g.corners[(a + 1) % 3];
    const Point2& q = g.corners[(a + 2) % 3];
    g.grad[a] = {(p.nu - q.nu) * inv, (q.y - p.y) * inv};
  }
  return g;
}

}  // namespace

SparseMatrix assemble_operator(const SpatialMesh& mesh, const CoefficientField& coefficients,
                               const std::function<bool(int)>& include) {
  const int J = mesh.num_dofs();
  std::vector<Triplet> triplets;
  triplets.reserve(mesh.triangles().size() * 9);

  for (int t = 0; t < static_cast<int>(mesh.triangles().size()); ++t) {
    if (include && !include(t)) continue;
    const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
    const LocalGeometry g = local_geometry(mesh, t);

    double local[3][3] = {};  // local[test][trial]
    // Edge midpoints: barycentric coordinates are 1/2 on the edge ends, 0 opposite.
    for (int e = 0; e < 3; ++e) {
      const int a0 = e;
      const int a1 = (e + 1) % 3;
      const Point2 mid{0.5 * (g.corners[a0].y + g.corners[a1].y),
                       0.5 * (g.corners[a0].nu + g.corners[a1].nu)};
      double lambda[3] = {0.0, 0.0, 0.0};
      lambda[a0] = 0.5;
      lambda[a1] = 0.5;
      const FormCoefficients c = coefficients(mid);
      const double weight = g.area / 3.0;
      for (int test = 0; test < 3; ++test) {
        for (int trial = 0; trial < 3; ++trial) {
          const auto& gu = g.grad[trial];
          const auto& gv = g.grad[test];
          const double diffusion = (c.diffusion[0][0] * gu[0] + c.diffusion[0][1] * gu[1]) * gv[0] +
                                   (c.diffusion[1][0] * gu[0] + c.diffusion[1][1] * gu[1]) * gv[1];
          const double convection = (c.convection[0] * gu[0] + c.convection[1] * gu[1]) * lambda[test];
          const double reaction = c.reaction * lambda[trial] * lambda[test];
          local[test][trial] += weight * (diffusion + convection + reaction);
        }
      }
    }

    for (int test = 0; test < 3; ++test) {
      const int row = mesh.dof_of(tri[test]);
      if (row == SpatialMesh::kBoundary) continue;
      for (int trial = 0; trial < 3; ++trial) {
        const int col = mesh.dof_of(tri[trial]);
        if (col == SpatialMesh::kBoundary) continue;
        triplets.emplace_back(row, col, local[test][trial]);
      }
    }
  }

  SparseMatrix matrix(J, J);
  matrix.setFromTriplets(triplets.begin(), triplets.end());
  matrix.makeCompressed();
  return matrix;
}

SparseMatrix assemble_mass(const SpatialMesh& mesh) {
  return assemble_operator(mesh, [](const Point2&) {
    FormCoefficients c;
    c.reaction = 1.0;
    return c;
  });
}

SparseMatrix assemble_stiffness(const SpatialMesh& mesh) {
  return assemble_operator(mesh, [](const Point2&) {
    FormCoefficients c;
    c.diffusion = {{{1.0, 0.0}, {0.0, 1.0}}};
    return c;
  });
}

SparseMatrix assemble_v_gramian(const SpatialMesh& mesh) {
  return assemble_operator(mesh, [](const Point2&) {
    FormCoefficients c;
    c.diffusion = {{{1.0, 0.0}, {0.0, 1.0}}};
    c.reaction = 1.0;
    return c;
  });
}

Vector integrate_basis(const SpatialMesh& mesh) {
  Vector integrals = Vector::Zero(mesh.num_dofs());
  for (int t = 0; t < static_cast<int>(mesh.triangles().size()); ++t) {
    const double third = mesh.signed_area(t) / 3.0;
    for (int v : mesh.triangles()[static_cast<std::size_t>(t)]) {
      const int dof = mesh.dof_of(v);
      if (dof != SpatialMesh::kBoundary) integrals[dof] += third;
    }
  }
  return integrals;
}

Vector WindowMatrices::restrict(const Vector& full) const {
  Vector out(static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) out[static_cast<Eigen::Index>(i)] = full[dofs[i]];
  return out;
}

WindowMatrices window_matrices(const SpatialMesh& mesh, const Rectangle& window) {
  const double tol = 1e-12 * std::max(1.0, mesh.domain().width());
  auto inside = [&](int t) {
    for (int v : mesh.triangles()[static_cast<std::size_t>(t)]) {
      const Point2& p = mesh.vertices()[static_cast<std::size_t>(v)];
      if (p.y < window.y_min - tol || p.y > window.y_max + tol || p.nu < window.nu_min - tol ||
          p.nu > window.nu_max + tol) {
        return false;
      }
    }
    return true;
  };
  std::vector<char> touched(static_cast<std::size_t>(mesh.num_dofs()), 0);
  for (int t = 0; t < static_cast<int>(mesh.triangles().size()); ++t) {
    if (!inside(t)) continue;
    for (int v : mesh.triangles()[static_cast<std::size_t>(t)]) {
      const int d = mesh.dof_of(v);
      if (d != SpatialMesh::kBoundary) touched[static_cast<std::size_t>(d)] = 1;
    }
  }
  WindowMatrices w;
  for (int d = 0; d < mesh.num_dofs(); ++d) {
    if (touched[static_cast<std::size_t>(d)]) w.dofs.push_back(d);
  }
  require(!w.dofs.empty(), "window contains no interior dofs");

  std::vector<Triplet> sel;
  for (std::size_t i = 0; i < w.dofs.size(); ++i) sel.emplace_back(static_cast<int>(i), w.dofs[i], 1.0);
  SparseMatrix restriction(static_cast<Eigen::Index>(w.dofs.size()), mesh.num_dofs());
  restriction.setFromTriplets(sel.begin(), sel.end());

  const SparseMatrix mass = assemble_operator(mesh, [](const Point2&) {
    FormCoefficients c;
    c.reaction = 1.0;
    return c;
  }, inside);
  const SparseMatrix stiffness = assemble_operator(mesh, [](const Point2&) {
    FormCoefficients c;
    c.diffusion = {{{1.0, 0.0}, {0.0, 1.0}}};
    return c;
  }, inside);
  w.mass = restriction * mass * SparseMatrix(restriction.transpose());
  w.v_gramian = restriction * SparseMatrix(stiffness + mass) * SparseMatrix(restriction.transpose());
  return w;
}

FormCoefficients heston_coefficients(const HestonCoefficients& c, double rho, const Point2& x) {
  const double nu = x.nu;
  FormCoefficients f;
  f.diffusion = {{{0.5 * nu, 0.5 * rho * nu * c.sigma}, {0.5 * rho * nu * c.sigma, 0.5 * nu * c.sigma * c.sigma}}};
  f.convection = {-(c.r - 0.5 * nu - 0.5 * c.sigma * rho),
                  -(c.kappa * c.theta - c.kappa * nu - 0.5 * c.sigma * c.sigma)};
  f.reaction = c.r;
  return f;
}

AffineSpatialForms assemble_heston_affine(const SpatialMesh& mesh, const HestonCoefficients& c) {
  c.validate();
  AffineSpatialForms forms;
  forms.matrices.push_back(assemble_operator(mesh, [&c](const Point2& x) {
    return heston_coefficients(c, 0.0, x);
  }));
  forms.thetas.push_back(ThetaId::One);
  forms.matrices.push_back(assemble_operator(mesh, [&c](const Point2& x) {
    FormCoefficients f;
    f.diffusion = {{{0.0, 0.5 * x.nu * c.sigma}, {0.5 * x.nu * c.sigma, 0.0}}};
    f.convection = {0.5 * c.sigma, 0.0};
    return f;
  }));
  forms.thetas.push_back(ThetaId::Rho);
  return forms;
}

SparseMatrix evaluate_affine(const AffineSpatialForms& forms, double rho) {
  require(!forms.matrices.empty(), "affine forms are empty");
  SparseMatrix sum = theta_value(forms.thetas[0], rho) * forms.matrices[0];
  for (std::size_t q = 1; q < forms.matrices.size(); ++q) {
    sum += theta_value(forms.thetas[q], rho) * forms.matrices[q];
  }
  sum.makeCompressed();
  return sum;
}

}  // namespace strb::fem2d
