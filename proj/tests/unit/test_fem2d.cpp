#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "strb/error.hpp"
#include "strb/fem2d.hpp"
#include "strb/io.hpp"

using namespace strb;
using namespace strb::fem2d;

namespace {

// Element-by-element dense mass from the reference-triangle matrix area/12 [[2,1,1],[1,2,1],[1,1,2]].
Matrix reference_mass(const SpatialMesh& mesh) {
  Matrix M = Matrix::Zero(mesh.num_dofs(), mesh.num_dofs());
  for (int t = 0; t < static_cast<int>(mesh.triangles().size()); ++t) {
    const double area = std::abs(mesh.signed_area(t));
    const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const int i = mesh.dof_of(tri[a]);
        const int j = mesh.dof_of(tri[b]);
        if (i < 0 || j < 0) continue;
        M(i, j) += area / 12.0 * (a == b ? 2.0 : 1.0);
      }
    }
  }
  return M;
}

}  // namespace

TEST_CASE("mesh counts and dof numbering") {
  const auto mesh = build_rect_mesh({0, 2, 0, 1}, 5, 4);
  CHECK(mesh.vertices().size() == 30u);
  CHECK(mesh.triangles().size() == 40u);
  CHECK(mesh.num_dofs() == 12);
  for (int d = 0; d < mesh.num_dofs(); ++d) CHECK(mesh.dof_of(mesh.vertex_of(d)) == d);
  for (int t = 0; t < 40; ++t) CHECK(mesh.signed_area(t) > 0.0);
  CHECK_THROWS_AS(build_rect_mesh({0, 0, 0, 1}, 2, 2), InvalidArgument);
}

TEST_CASE("single interior node: mass and stiffness by hand") {
  const auto mesh = build_rect_mesh({0, 2, 0, 2}, 2, 2);
  REQUIRE(mesh.num_dofs() == 1);
  // Six triangles of area 1/2 meet at the centre, each contributing area/6.
  CHECK(assemble_mass(mesh).coeff(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(assemble_stiffness(mesh).coeff(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(integrate_basis(mesh)[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mass matrix matches the reference element on graded meshes") {
  const SpatialMesh mesh(knot_aligned_lines({-3.0, 0.2, 1.0, 4.0}, 11), uniform_lines(0.1, 0.9, 6));
  const Matrix M = test::dense(assemble_mass(mesh));
  CHECK(test::rel_diff(M, reference_mass(mesh)) < 1e-14);
  CHECK((M - M.transpose()).norm() < 1e-15);
}

TEST_CASE("affine decomposition equals direct assembly") {
  const SpatialMesh mesh(knot_aligned_lines({std::log(1e-8), std::log(70.0), std::log(200.0)}, 14),
                         uniform_lines(0.05, 1.0, 7));
  const HestonCoefficients c;
  const auto forms = assemble_heston_affine(mesh, c);
  REQUIRE(forms.num_terms() == 2);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double rho = d(rng);
    const SparseMatrix direct =
        assemble_operator(mesh, [&](const Point2& x) { return heston_coefficients(c, rho, x); });
    CHECK(test::rel_diff(test::dense(evaluate_affine(forms, rho)), test::dense(direct)) <= 1e-12);
  }
}

TEST_CASE("operator convention: S(j, i) = a(phi_i, phi_j)") {
  // Pure convection beta = (1, 0): a(u, v) = int u_y v, so S(j, i) = int d_y phi_i phi_j.
  const auto mesh = build_rect_mesh({0, 1, 0, 1}, 6, 5);
  const SparseMatrix S = assemble_operator(mesh, [](const Point2&) {
    FormCoefficients f;
    f.convection = {1.0, 0.0};
    return f;
  });
  const Vector u = restrict_to_dofs(mesh, [](const Point2& p) { return p.y * (1 - p.y) * p.nu * (1 - p.nu); });
  const Vector Su = S * u;
  const Matrix St = test::dense(S).transpose();
  // With zero boundary values int u_y v = -int u v_y, so S is skew.
  CHECK(std::abs(u.dot(Su)) < 1e-14);
  CHECK((test::dense(S) + St).norm() < 1e-14);
}

TEST_CASE("Poisson problem converges at second order in L2") {
  std::vector<double> errors;
  for (int n : {8, 16, 32}) {
    const auto mesh = build_rect_mesh({0, 1, 0, 1}, n, n);
    const double pi = std::numbers::pi;
    auto exact = [pi](const Point2& p) { return std::sin(pi * p.y) * std::sin(pi * p.nu); };
    const SparseMatrix K = assemble_stiffness(mesh);
    const SparseMatrix M = assemble_mass(mesh);
    const Vector uI = restrict_to_dofs(mesh, exact);
    const Vector f = M * (2 * pi * pi * uI);
    Eigen::SimplicialLLT<SparseMatrix> llt(K);
    const Vector e = llt.solve(f) - uI;
    errors.push_back(std::sqrt(e.dot(M * e)));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) CHECK(std::log2(errors[i - 1] / errors[i]) >= 1.9);
}

TEST_CASE("knot aligned lines contain every knot") {
  const std::vector<double> knots{-18.4, 4.25, 4.38, 4.5, 4.6, 4.7, 5.3};
  const auto lines = knot_aligned_lines(knots, 40, {}, 2);
  for (double k : knots) {
    bool found = false;
    for (double l : lines) found = found || std::abs(l - k) < 1e-12;
    CHECK(found);
  }
  for (std::size_t i = 1; i < lines.size(); ++i) CHECK(lines[i] > lines[i - 1]);
}

TEST_CASE("embedding constant matches a dense eigenvalue") {
  const auto mesh = build_rect_mesh({0, 1, 0, 1}, 6, 6);
  const SparseMatrix M = assemble_mass(mesh);
  const SparseMatrix G = assemble_v_gramian(mesh);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(test::dense(M), test::dense(G));
  CHECK(embedding_constant(M, G, 2000) == doctest::Approx(std::sqrt(es.eigenvalues().maxCoeff())).epsilon(1e-6));
}

TEST_CASE("window matrices") {
  const auto mesh = build_rect_mesh({0, 4, 0, 2}, 8, 4);
  SUBCASE("whole domain equals the full matrices") {
    const auto w = window_matrices(mesh, mesh.domain());
    CHECK(static_cast<int>(w.dofs.size()) == mesh.num_dofs());
    CHECK(test::rel_diff(test::dense(w.mass), test::dense(assemble_mass(mesh))) < 1e-15);
    CHECK(test::rel_diff(test::dense(w.v_gramian), test::dense(assemble_v_gramian(mesh))) < 1e-15);
  }
  SUBCASE("left half integrates half of a symmetric field") {
    const auto w = window_matrices(mesh, {0, 2, 0, 2});
    const Vector u = restrict_to_dofs(mesh, [](const Point2& p) { return p.y * (4 - p.y) * p.nu * (2 - p.nu); });
    const double full = u.dot(assemble_mass(mesh) * u);
    const Vector r = w.restrict(u);
    CHECK(r.dot(w.mass * r) == doctest::Approx(full / 2).epsilon(1e-12));
  }
}

TEST_CASE("triplet export round trip") {
  const auto mesh = build_rect_mesh({0, 1, 0, 1}, 4, 3);
  const SparseMatrix A = assemble_v_gramian(mesh);
  std::stringstream ss;
  io::write_triplets(ss, A);
  const SparseMatrix B = io::read_triplets(ss);
  CHECK((test::dense(A) - test::dense(B)).norm() == 0.0);
}

TEST_CASE("Heston coefficients reject invalid data") {
  HestonCoefficients c;
  c.kappa = -1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}
