#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "strb/truth.hpp"

using namespace strb;

namespace {

Matrix dense_BT(const truth::TruthSolver& s, double rho) {
  const auto& tm = s.op().temporal();
  return test::kron(tm.N.transpose(), test::dense(s.op().mass())) +
         test::kron(tm.M.transpose(), test::dense(fem2d::evaluate_affine(s.op().forms(), rho)));
}

// Dense Gramian of the Xbar norm on the stacked nodal states u^0..u^K.
Matrix dense_xbar(const SparseMatrix& Ms, const SparseMatrix& Gs, double dt, int K) {
  const Matrix M = test::dense(Ms);
  const Matrix G = test::dense(Gs);
  const Matrix MGM = M * G.ldlt().solve(M);
  const Eigen::Index J = M.rows();
  Matrix X = Matrix::Zero((K + 1) * J, (K + 1) * J);
  for (int k = 1; k <= K; ++k) {
    Matrix avg = Matrix::Zero(1, K + 1);
    avg(0, k - 1) = 0.5;
    avg(0, k) = 0.5;
    Matrix diff = Matrix::Zero(1, K + 1);
    diff(0, k - 1) = -1.0;
    diff(0, k) = 1.0;
    X += dt * test::kron(avg.transpose() * avg, G) + (1.0 / dt) * test::kron(diff.transpose() * diff, MGM);
  }
  Matrix last = Matrix::Zero(K + 1, K + 1);
  last(K, K) = 1.0;
  X += test::kron(last, M);
  return X;
}

Vector stack(const std::vector<Vector>& states) {
  Vector v(static_cast<Eigen::Index>(states.size()) * states.front().size());
  for (std::size_t k = 0; k < states.size(); ++k) v.segment(static_cast<Eigen::Index>(k) * states[k].size(), states[k].size()) = states[k];
  return v;
}

std::unique_ptr<truth::TruthSolver> heat_solver(const fem2d::SpatialMesh& mesh, double T, int K) {
  const SparseMatrix M = fem2d::assemble_mass(mesh);
  fem2d::AffineSpatialForms forms{{fem2d::assemble_stiffness(mesh)}, {ThetaId::One}};
  timegrid::SpaceTimeOperator op(timegrid::TimeGrid(T, K), M, forms);
  return std::make_unique<truth::TruthSolver>(std::move(op), timegrid::identity_init_space(M),
                                              fem2d::assemble_v_gramian(mesh));
}

}  // namespace

TEST_CASE("Crank-Nicolson on a single dof is the scalar recursion") {
  const auto mesh = fem2d::build_rect_mesh({0, 2, 0, 2}, 2, 2);
  const auto s = heat_solver(mesh, 1.0, 8);
  const double m = 0.5, a = 4.0, dt = 1.0 / 8;
  const double r = (m - dt / 2 * a) / (m + dt / 2 * a);
  const auto tr = s->solve(0.0, Vector::Constant(1, 3.0));
  for (int k = 1; k <= 8; ++k) CHECK(tr.steps[k - 1][0] == doctest::Approx(3.0 * std::pow(r, k)).epsilon(1e-13));
}

TEST_CASE("truth solver on a small Heston problem") {
  const auto p = build_problem(test::small_config(8, 4, 6));
  const auto& s = *p->truth;
  const Eigen::Index J = p->J();
  std::mt19937 rng(5);
  const Vector u = test::random_vector(J, rng);
  const Vector v = test::random_vector(J, rng);
  const double rho = 0.27;

  SUBCASE("linearity in the initial value") {
    const auto a = s.solve(rho, u).evolution();
    const auto b = s.solve(rho, v).evolution();
    const auto c = s.solve(rho, u + 2.0 * v).evolution();
    CHECK(test::rel_diff(c, a + 2.0 * b) < 1e-12);
  }
  SUBCASE("modified right-hand side") {
    const Vector f = s.modified_rhs(rho, u);
    const Matrix C = test::dense(p->mass) - s.grid().dt() / 2 * test::dense(fem2d::evaluate_affine(s.op().forms(), rho));
    CHECK(test::rel_diff(f.head(J), C * u) < 1e-13);
    CHECK(f.tail(f.size() - J).norm() == 0.0);
  }
  SUBCASE("CN trajectory solves the space-time system") {
    const auto tr = s.solve(rho, u);
    const Matrix BT = dense_BT(s, rho);
    const Vector w = BT.lu().solve(s.modified_rhs(rho, u));
    CHECK(test::rel_diff(tr.evolution(), w) < 1e-10);
    CHECK(s.dual_norm_Z(s.spacetime_residual(tr)) <= 1e-12 * s.dual_norm_Z(s.modified_rhs(rho, u)));
  }
  SUBCASE("forward and adjoint block solves") {
    const Matrix BT = dense_BT(s, rho);
    const Vector f = test::random_vector(BT.rows(), rng);
    CHECK(test::rel_diff(s.solve_forward(rho, f), BT.lu().solve(f)) < 1e-10);
    CHECK(test::rel_diff(s.solve_adjoint(rho, f), BT.transpose().lu().solve(f)) < 1e-10);
  }
  SUBCASE("Xbar norm against the dense Gramian") {
    const auto tr = s.solve(rho, u);
    const auto states = truth::nodal_states(tr, s.init_space());
    const Matrix X = dense_xbar(p->mass, p->v_gramian, s.grid().dt(), s.grid().K);
    const Vector x = stack(states);
    CHECK(s.xbar().norm(states) == doctest::Approx(std::sqrt(x.dot(X * x))).epsilon(1e-12));
    const Vector w = tr.evolution();
    Vector xw = Vector::Zero(x.size());
    xw.tail(w.size()) = w;
    CHECK(s.xbar().norm_evolution(w) == doctest::Approx(std::sqrt(xw.dot(X * xw))).epsilon(1e-12));
  }
  SUBCASE("initial projection is H-orthogonal") {
    const Vector mu = Vector::LinSpaced(p->knots.L(), 1.0, 2.0);
    const Vector u0 = p->project(mu);
    // (mu - P mu, phi_j)_H = 0 for all j.
    CHECK((p->N_LM.transpose() * mu - p->mass * u0).norm() < 1e-12 * (p->N_LM.transpose() * mu).norm());
  }
}

TEST_CASE("discrete inf-sup proxy matches a dense generalized eigenproblem") {
  const auto p = build_problem(test::small_config(8, 4, 5));
  const auto& s = *p->truth;
  const Eigen::Index J = p->J();
  const int K = s.grid().K;
  const double rho = -0.4;
  const double dt = s.grid().dt();
  const Eigen::Index n = J + K * J;

  Matrix B = Matrix::Zero(n, n);  // rows: test blocks then the initial condition
  B.block(0, J, K * J, K * J) = dense_BT(s, rho);
  B.block(0, 0, J, J) = -test::dense(p->mass) + dt / 2 * test::dense(fem2d::evaluate_affine(s.op().forms(), rho));
  B.block(K * J, 0, J, J) = test::dense(p->mass);
  Matrix Y = Matrix::Zero(n, n);
  Y.block(0, 0, K * J, K * J) = test::kron(dt * Matrix::Identity(K, K), test::dense(p->v_gramian));
  Y.block(K * J, K * J, J, J) = test::dense(p->mass);
  const Matrix X = dense_xbar(p->mass, p->v_gramian, dt, K);
  const Matrix H = B.transpose() * Y.ldlt().solve(B);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.transpose()), X);
  const double sigma = std::sqrt(es.eigenvalues().minCoeff());

  const auto est = truth::discrete_infsup(s, rho, 3000, 1e-12);
  CHECK(est.value == doctest::Approx(sigma).epsilon(1e-4));
}

TEST_CASE("right-hand side terms enter the midpoint load") {
  const auto mesh = fem2d::build_rect_mesh({0, 1, 0, 1}, 4, 4);
  const auto s = heat_solver(mesh, 1.0, 4);
  const Vector phi = Vector::Ones(mesh.num_dofs());
  truth::RhsSpec rhs;
  rhs.terms.push_back(truth::sample_rhs_term(s->grid(), ThetaId::Rho, [&](double t) -> Vector { return t * phi; }));
  CHECK(test::rel_diff(rhs.midpoint_load(2.0, 3), 2.0 * 0.625 * phi) < 1e-15);
  const auto tr = s->solve(2.0, Vector::Zero(mesh.num_dofs()), rhs);
  CHECK(s->dual_norm_Z(s->spacetime_residual(tr, rhs)) < 1e-12 * s->dual_norm_Z(s->modified_rhs(2.0, tr.initial, rhs)));
}
