#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "strb/error.hpp"
#include "strb/timegrid.hpp"

using namespace strb;
using namespace strb::timegrid;

namespace {

// Temporal hats sigma^k and indicators tau^l on a uniform grid, with the hat derivative.
double hat(const TimeGrid& g, int k, double t) {
  const double s = std::abs(t - g.node(k)) / g.dt();
  return s < 1.0 ? 1.0 - s : 0.0;
}
double hat_dot(const TimeGrid& g, int k, double t) {
  if (t > g.node(k - 1) && t < g.node(k)) return 1.0 / g.dt();
  if (t > g.node(k) && t < g.node(k + 1)) return -1.0 / g.dt();
  return 0.0;
}
double indicator(const TimeGrid& g, int l, double t) { return t > g.node(l - 1) && t < g.node(l) ? 1.0 : 0.0; }

}  // namespace

TEST_CASE("temporal matrices agree with quadrature") {
  const TimeGrid g(0.7, 6);
  const auto tm = temporal_matrices(g);
  const int n = 1000 * g.K;
  for (int k = 0; k <= g.K; ++k) {
    for (int l = 1; l <= g.K; ++l) {
      double n_kl = 0.0;
      double m_kl = 0.0;
      for (int i = 0; i < n; ++i) {
        const double t = (i + 0.5) * g.T / n;
        n_kl += hat_dot(g, k, t) * indicator(g, l, t) * g.T / n;
        m_kl += hat(g, k, t) * indicator(g, l, t) * g.T / n;
      }
      if (k == 0) {
        CHECK(tm.n_initial[l - 1] == doctest::Approx(n_kl).epsilon(1e-9));
        CHECK(tm.m_initial[l - 1] == doctest::Approx(m_kl).epsilon(1e-9));
      } else {
        CHECK(tm.N(k - 1, l - 1) == doctest::Approx(n_kl).epsilon(1e-9));
        CHECK(tm.M(k - 1, l - 1) == doctest::Approx(m_kl).scale(1.0).epsilon(1e-9));
      }
    }
  }
  CHECK((tm.I - g.dt() * Matrix::Identity(g.K, g.K)).norm() < 1e-15);
}

TEST_CASE("space-time operator equals the dense Kronecker product") {
  const auto mesh = fem2d::build_rect_mesh({0, 1, 0, 1}, 4, 3);
  const SparseMatrix Ms = fem2d::assemble_mass(mesh);
  const fem2d::HestonCoefficients hc;
  const auto forms = fem2d::assemble_heston_affine(mesh, hc);
  const SpaceTimeOperator op(TimeGrid(0.5, 5), Ms, forms);
  const double rho = -0.35;
  const auto& tm = op.temporal();
  const Matrix BT = test::kron(tm.N.transpose(), test::dense(Ms)) +
                    test::kron(tm.M.transpose(), test::dense(fem2d::evaluate_affine(forms, rho)));
  std::mt19937 rng(3);
  const Vector w = test::random_vector(op.dim(), rng);
  CHECK(test::rel_diff(op.apply(rho, w), BT * w) < 1e-14);
  CHECK(test::rel_diff(op.apply_transpose(rho, w), BT.transpose() * w) < 1e-14);

  Vector sum = Vector::Zero(op.dim());
  for (int q = 0; q < op.num_terms(); ++q) sum += theta_value(op.theta(q), rho) * op.apply_term(q, w);
  CHECK(test::rel_diff(sum, BT * w) < 1e-14);
  CHECK(op.theta(op.num_terms() - 1) == ThetaId::One);
}

TEST_CASE("Z Gramian inverse and dual norm") {
  const auto mesh = fem2d::build_rect_mesh({0, 1, 0, 1}, 4, 4);
  const SparseMatrix G = fem2d::assemble_v_gramian(mesh);
  const TimeGrid g(1.0, 4);
  const ZGramian Z(g, G);
  const Matrix Zd = test::kron(g.dt() * Matrix::Identity(4, 4), test::dense(G));
  std::mt19937 rng(11);
  const Vector r = test::random_vector(Zd.rows(), rng);
  CHECK(test::rel_diff(Z.apply(r), Zd * r) < 1e-14);
  CHECK(test::rel_diff(Z.apply_inverse(Z.apply(r)), r) < 1e-12);
  CHECK(Z.dual_norm(r) == doctest::Approx(std::sqrt(r.dot(Zd.ldlt().solve(r)))).epsilon(1e-12));
}

TEST_CASE("coupling matrices for the identity initial space") {
  const auto mesh = fem2d::build_rect_mesh({0, 1, 0, 1}, 4, 3);
  const SparseMatrix Ms = fem2d::assemble_mass(mesh);
  const auto forms = fem2d::assemble_heston_affine(mesh, {});
  const SpaceTimeOperator op(TimeGrid(0.5, 5), Ms, forms);
  const auto c = assemble_coupling(op, identity_init_space(Ms));
  const double rho = 0.4;
  // C(rho)^T u0 must equal (-M + dt/2 A(rho)) u0, the sigma^0 contribution on the first test block.
  const Matrix expected = -test::dense(Ms) + 0.05 * test::dense(fem2d::evaluate_affine(forms, rho));
  CHECK(test::rel_diff(test::dense(c.C(rho)).transpose(), expected) < 1e-14);
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(TimeGrid(0.0, 3), InvalidArgument);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), InvalidArgument);
}
