#include <cmath>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "strb/error.hpp"
#include "strb/rbm.hpp"

namespace strb::rbm {

ReducedSolution ReducedModel::solve(const Vector& alpha0, double rho, bool with_sigma_min) const {
  require(alpha0.size() == N0(), "initial-value coefficients have wrong length");
  const int Qb = Q_b();
  const Eigen::Index r = riesz.rows();
  require(riesz.cols() == rhs_terms() + N1() * Qb, "reduced model is inconsistent");

  Vector theta(Qb);
  for (int q = 0; q < Qb; ++q) theta[q] = theta_value(b_thetas[static_cast<std::size_t>(q)], rho);

  // Right-hand side in Riesz coordinates.
  Vector e = Vector::Zero(r);
  for (int q = 0; q < Q_g(); ++q) e += theta_value(g_thetas[static_cast<std::size_t>(q)], rho) * riesz.col(q);
  for (int n = 0; n < N0(); ++n) {
    if (alpha0[n] == 0.0) continue;
    for (int q = 0; q < Qb; ++q) e += (alpha0[n] * theta[q]) * riesz.col(Q_g() + n * Qb + q);
  }

  ReducedSolution s;
  s.alpha0 = alpha0;
  s.rho = rho;
  if (N1() == 0) {
    s.wN.resize(0);
    s.R_N1 = e.norm();
    return s;
  }

  // Riesz representers of b_1(w^n, .): the supremizers in Riesz coordinates.
  Matrix D = Matrix::Zero(r, N1());
  const int off = rhs_terms();
  for (int n = 0; n < N1(); ++n) {
    for (int q = 0; q < Qb; ++q) D.col(n) += theta[q] * riesz.col(off + n * Qb + q);
  }
  // Petrov-Galerkin with the supremizer test space == least squares in the Z' norm.
  Eigen::HouseholderQR<Matrix> qr(D);
  const auto R = qr.matrixQR().topRows(N1()).diagonal().cwiseAbs();
  const double rmax = R.maxCoeff();
  const double rmin = R.minCoeff();
  if (!(rmin > 1e-14 * rmax)) {
    std::ostringstream msg;
    msg << "reduced system is singular at rho = " << rho << " (condition estimate "
        << (rmin > 0.0 ? rmax / rmin : INFINITY) << "); the reduced inf-sup condition is lost here";
    throw NumericalError(msg.str());
  }
  s.wN = qr.solve(e);
  s.R_N1 = (e - D * s.wN).norm();
  if (with_sigma_min) {
    Eigen::JacobiSVD<Matrix> svd(D);
    s.sigma_min = svd.singularValues().minCoeff();
  }
  return s;
}

ReducedSolution ReducedModel::solve_payoff(const Vector& mu0_L, double rho, bool with_sigma_min) const {
  const InitProjection p = rb_init_project(bernstein, mu0_L);
  ReducedSolution s = solve(p.alpha, rho, with_sigma_min);
  s.R_N0 = p.R_N0;
  return s;
}

truth::ErrorBreakdown ReducedModel::estimate(const ReducedSolution& solution, double beta_LB) const {
  return truth::ErrorBreakdown::make(solution.R_N0, solution.R_N1, beta_LB);
}

std::vector<Vector> reduced_states(const truth::TruthSolver& solver, const ReducedModel& model,
                                   const ReducedSolution& solution) {
  const Eigen::Index J = solver.spatial_dim();
  require(model.J == J && model.K == solver.grid().K, "reduced model does not match the detailed solver");
  std::vector<Vector> states;
  states.reserve(static_cast<std::size_t>(model.K) + 1);
  states.push_back(solver.embed_initial(model.initial_value(solution)));
  const Vector w = model.N1() > 0 ? model.evolution(solution) : Vector::Zero(J * model.K);
  for (int k = 1; k <= model.K; ++k) states.emplace_back(timegrid::block(w, k, J));
  return states;
}

double true_error(const truth::TruthSolver& solver, const ReducedModel& model, const ReducedSolution& solution,
                  const truth::TruthTrajectory& truth) {
  auto diff = truth::nodal_states(truth, solver.init_space());
  const auto red = reduced_states(solver, model, solution);
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= red[k];
  return solver.xbar().norm(diff);
}

}  // namespace strb::rbm
