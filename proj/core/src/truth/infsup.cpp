#include <cmath>

#include "strb/error.hpp"
#include "strb/truth.hpp"

namespace strb::truth {

namespace {

using timegrid::block;

// A trial element of the full space: initial-value coefficients plus evolution part.
struct FullVector {
  Vector u0;
  Vector w;
};

}  // namespace

InfSupEstimate discrete_infsup(const TruthSolver& solver, double rho, int max_iterations, double tolerance) {
  require(max_iterations >= 1, "need at least one iteration");
  const Eigen::Index J = solver.spatial_dim();
  const int K = solver.grid().K;
  const auto& init = solver.init_space();
  const SparseMatrix C = solver.coupling().C(rho);  // M x J

  // Xbar applied to (u0, w), returned in the dual coordinates of (u0, w).
  auto xbar_apply = [&](const FullVector& x) {
    std::vector<Vector> states = evolution_states(x.w, J, K);
    states[0] = init.embedding * x.u0;
    const auto g = solver.xbar().apply(states);
    FullVector out{init.embedding.transpose() * g[0], Vector(J * K)};
    for (int k = 1; k <= K; ++k) block(out.w, k, J) = g[static_cast<std::size_t>(k)];
    return out;
  };
  auto xbar_norm = [&](const FullVector& x) {
    const FullVector g = xbar_apply(x);
    return std::sqrt(std::max(0.0, x.u0.dot(g.u0) + x.w.dot(g.w)));
  };
  // Operator: (u0, w) -> (B^T w + e_1 C^T u0, M_init u0); its Y' norm.
  auto residual_norm = [&](const FullVector& x) {
    Vector f = solver.op().apply(rho, x.w);
    block(f, 1, J) += C.transpose() * x.u0;
    const Vector h = init.gram * x.u0;
    const double sq = solver.z_gramian().dual_norm(f) * solver.z_gramian().dual_norm(f) +
                      h.dot(solver.solve_init_gram(h));
    return std::sqrt(std::max(0.0, sq));
  };

  // Deterministic start: smooth in space, linear ramp in time.
  FullVector x{Vector::Ones(init.dim()), Vector(J * K)};
  for (int k = 1; k <= K; ++k) block(x.w, k, J).setConstant(static_cast<double>(k) / K);

  InfSupEstimate est;
  double previous = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    // y = Xbar x (the functional), then x <- Op^{-1} Y Op^{-T} y.
    const FullVector y = xbar_apply(x);
    // Op^T (a, b) = (B a + ..., ...): solve Op^T (a, b) = y.
    //   w-rows: B a = y.w;  u0-rows: C a^1 + M_init b = y.u0.
    const Vector a = solver.solve_adjoint(rho, y.w);
    const Vector b = solver.solve_init_gram(y.u0 - C * Vector(block(a, 1, J)));
    // Apply Y = diag(Z, M_init).
    const Vector za = solver.z_gramian().apply(a);
    const Vector mb = init.gram * b;
    // Solve Op (u0, w) = (za, mb).
    FullVector next;
    next.u0 = solver.solve_init_gram(mb);
    Vector f = za;
    block(f, 1, J) -= C.transpose() * next.u0;
    next.w = solver.solve_forward(rho, f);

    const double n = xbar_norm(next);
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("inf-sup iteration broke down");
    next.u0 /= n;
    next.w /= n;
    x = std::move(next);
    est.value = residual_norm(x);
    est.iterations = it;
    est.last_change = std::abs(est.value - previous) / std::max(est.value, 1e-300);
    if (it > 1 && est.last_change <= tolerance) break;
    previous = est.value;
  }
  return est;
}

}  // namespace strb::truth
