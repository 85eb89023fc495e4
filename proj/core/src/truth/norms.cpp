#include <cmath>

#include "strb/error.hpp"
#include "strb/truth.hpp"

namespace strb::truth {

XbarNorm::XbarNorm(const timegrid::TimeGrid& grid, SparseMatrix mass, SparseMatrix v_gramian)
    : dt_(grid.dt()), K_(grid.K), mass_(std::move(mass)), gram_(std::move(v_gramian)),
      factor_(std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(gram_)) {
  require(mass_.rows() == gram_.rows(), "mass and V-Gramian differ in size");
  if (factor_->info() != Eigen::Success) throw NumericalError("V-Gramian factorization failed");
}

std::vector<Vector> XbarNorm::apply(const std::vector<Vector>& states) const {
  require(static_cast<int>(states.size()) == K_ + 1, "trajectory needs K + 1 states");
  const Eigen::Index J = spatial_dim();
  std::vector<Vector> out(states.size(), Vector::Zero(J));
  for (int k = 1; k <= K_; ++k) {
    const Vector& a = states[static_cast<std::size_t>(k - 1)];
    const Vector& b = states[static_cast<std::size_t>(k)];
    // averages: dt/4 G (a + b) on both ends
    const Vector avg = (0.25 * dt_) * (gram_ * (a + b));
    // slopes: (1/dt) M G^{-1} M (b - a)
    const Vector slope = mass_ * factor_->solve(Vector(mass_ * (b - a))) / dt_;
    out[static_cast<std::size_t>(k - 1)] += avg - slope;
    out[static_cast<std::size_t>(k)] += avg + slope;
  }
  out.back() += mass_ * states.back();
  return out;
}

double XbarNorm::inner(const std::vector<Vector>& a, const std::vector<Vector>& b) const {
  const auto gb = apply(b);
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k].dot(gb[k]);
  return sum;
}

double XbarNorm::norm(const std::vector<Vector>& states) const {
  return std::sqrt(std::max(0.0, inner(states, states)));
}

Vector XbarNorm::apply_evolution(const Vector& w) const {
  const Eigen::Index J = spatial_dim();
  const auto g = apply(evolution_states(w, J, K_));
  Vector out(w.size());
  for (int k = 1; k <= K_; ++k) timegrid::block(out, k, J) = g[static_cast<std::size_t>(k)];
  return out;
}

double XbarNorm::norm_evolution(const Vector& w) const {
  return std::sqrt(std::max(0.0, w.dot(apply_evolution(w))));
}

double XbarNorm::dual_norm_h(const Vector& d) const {
  const Vector md = mass_ * d;
  return std::sqrt(std::max(0.0, md.dot(factor_->solve(md))));
}

}  // namespace strb::truth
