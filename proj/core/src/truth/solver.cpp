#include <cmath>
#include <sstream>

#include "strb/error.hpp"
#include "strb/truth.hpp"

namespace strb::truth {

using timegrid::block;

namespace {

constexpr std::size_t kMaxCachedFactors = 64;

bool is_symmetric(const SparseMatrix& a) {
  const SparseMatrix diff = SparseMatrix(a.transpose()) - a;
  double scale = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  }
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      if (std::abs(it.value()) > 1e-14 * scale) return false;
    }
  }
  return true;
}

}  // namespace

Vector RhsSpec::midpoint_load(double rho, int k) const {
  require(!terms.empty(), "right-hand side has no terms");
  Vector g = Vector::Zero(terms.front().nodal_loads.front().size());
  for (const auto& term : terms) {
    require(k >= 1 && k < static_cast<int>(term.nodal_loads.size()), "time index out of range");
    g += (0.5 * theta_value(term.theta, rho)) *
         (term.nodal_loads[static_cast<std::size_t>(k - 1)] + term.nodal_loads[static_cast<std::size_t>(k)]);
  }
  return g;
}

RhsTerm sample_rhs_term(const timegrid::TimeGrid& grid, ThetaId theta,
                        const std::function<Vector(double)>& load) {
  RhsTerm term;
  term.theta = theta;
  for (int k = 0; k <= grid.K; ++k) term.nodal_loads.push_back(load(grid.node(k)));
  return term;
}

Vector TruthTrajectory::evolution() const {
  require(!steps.empty(), "empty trajectory");
  const Eigen::Index J = steps.front().size();
  Vector w(J * K());
  for (int k = 1; k <= K(); ++k) block(w, k, J) = steps[static_cast<std::size_t>(k - 1)];
  return w;
}

std::vector<Vector> nodal_states(const TruthTrajectory& trajectory, const timegrid::InitSpace& init) {
  std::vector<Vector> states;
  states.reserve(trajectory.steps.size() + 1);
  states.emplace_back(init.embedding * trajectory.initial);
  for (const auto& s : trajectory.steps) states.push_back(s);
  return states;
}

std::vector<Vector> evolution_states(const Vector& w, Eigen::Index J, int K) {
  require(w.size() == J * K, "space-time vector has wrong length");
  std::vector<Vector> states;
  states.reserve(static_cast<std::size_t>(K) + 1);
  states.emplace_back(Vector::Zero(J));
  for (int k = 1; k <= K; ++k) states.emplace_back(block(w, k, J));
  return states;
}

Vector project_initial(const Vector& mu0_coeffs, const Matrix& N_LM, const SparseMatrix& M_init) {
  require(N_LM.rows() == mu0_coeffs.size(), "initial-value coefficients do not match N_LM");
  require(N_LM.cols() == M_init.rows() && M_init.rows() == M_init.cols(), "N_LM and M_init disagree");
  Eigen::SimplicialLLT<SparseMatrix> llt(SparseMatrix(M_init.transpose()));
  if (llt.info() != Eigen::Success) throw NumericalError("initial-value Gramian is singular");
  return llt.solve(Vector(N_LM.transpose() * mu0_coeffs));
}

ErrorBreakdown ErrorBreakdown::make(double r0, double r1, double beta_lb) {
  require(beta_lb > 0.0, "inf-sup lower bound must be positive");
  ErrorBreakdown e;
  e.R_N0 = r0;
  e.R_N1 = r1;
  e.beta_LB = beta_lb;
  e.delta = (r0 + r1) / beta_lb;
  e.delta1 = r1 / beta_lb;
  return e;
}

TruthSolver::TruthSolver(timegrid::SpaceTimeOperator op, timegrid::InitSpace init, SparseMatrix v_gramian)
    : op_(std::move(op)),
      init_(std::move(init)),
      coupling_(timegrid::assemble_coupling(op_, init_)),
      z_(op_.grid(), v_gramian),
      xbar_(op_.grid(), op_.mass(), v_gramian),
      init_factor_(init_.gram) {
  if (init_factor_.info() != Eigen::Success) throw NumericalError("initial-value Gramian is singular");
}

Vector TruthSolver::StepFactor::solve(const Vector& b, bool transpose) const {
  if (llt) return llt->solve(b);
  return transpose ? Vector(lu->transpose().solve(b)) : Vector(lu->solve(b));
}

std::shared_ptr<const TruthSolver::StepFactor> TruthSolver::factor(double rho) const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(rho);
    if (it != cache_.end()) return it->second;
  }
  auto f = std::make_shared<StepFactor>();
  const double half = 0.5 * grid().dt();
  const SparseMatrix a = fem2d::evaluate_affine(op_.forms(), rho);
  f->implicit = op_.mass() + half * a;
  f->explicit_part = half * a - op_.mass();
  f->implicit.makeCompressed();
  bool ok = false;
  if (is_symmetric(a)) {
    f->llt = std::make_unique<Eigen::SimplicialLLT<SparseMatrix>>(f->implicit);
    ok = f->llt->info() == Eigen::Success;
    if (!ok) f->llt.reset();
  }
  if (!ok) {
    f->lu = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
    f->lu->analyzePattern(f->implicit);
    f->lu->factorize(f->implicit);
    if (f->lu->info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "Crank-Nicolson step matrix M + dt/2 A(rho) is singular at rho = " << rho << " (dt = " << grid().dt()
          << "); the time step is too large for this operator, increase K or refine the mesh (CFL-type condition)";
      throw NumericalError(msg.str());
    }
  }
  std::lock_guard<std::mutex> lock(cache_mutex_);
  if (cache_.size() >= kMaxCachedFactors) cache_.erase(cache_.begin());
  cache_.emplace(rho, f);
  return f;
}

void TruthSolver::clear_cache() const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  cache_.clear();
}

Vector TruthSolver::solve_init_gram(const Vector& b) const { return init_factor_.solve(b); }

Vector TruthSolver::embed_initial(const Vector& u0) const {
  require(u0.size() == init_.dim(), "initial value has wrong length");
  return init_.embedding * u0;
}

Vector TruthSolver::modified_rhs(double rho, const Vector& u0, const RhsSpec& rhs) const {
  require(u0.size() == init_.dim(), "initial value has wrong length");
  const Eigen::Index J = spatial_dim();
  const int K = grid().K;
  Vector f = Vector::Zero(J * K);
  if (!rhs.empty()) {
    for (int k = 1; k <= K; ++k) block(f, k, J) = grid().dt() * rhs.midpoint_load(rho, k);
  }
  block(f, 1, J) -= coupling_.C(rho).transpose() * u0;
  return f;
}

Vector TruthSolver::solve_forward(double rho, const Vector& f) const {
  const Eigen::Index J = spatial_dim();
  const int K = grid().K;
  require(f.size() == J * K, "space-time vector has wrong length");
  const auto step = factor(rho);
  Vector w(J * K);
  Vector b(J);
  for (int k = 1; k <= K; ++k) {
    b = block(f, k, J);
    if (k > 1) b -= step->explicit_part * block(w, k - 1, J);
    block(w, k, J) = step->solve(b, false);
  }
  return w;
}

Vector TruthSolver::solve_adjoint(double rho, const Vector& f) const {
  const Eigen::Index J = spatial_dim();
  const int K = grid().K;
  require(f.size() == J * K, "space-time vector has wrong length");
  const auto step = factor(rho);
  Vector z(J * K);
  Vector b(J);
  for (int k = K; k >= 1; --k) {
    b = block(f, k, J);
    if (k < K) b -= step->explicit_part.transpose() * block(z, k + 1, J);
    block(z, k, J) = step->solve(b, true);
  }
  return z;
}

TruthTrajectory TruthSolver::solve(double rho, const Vector& u0, const RhsSpec& rhs) const {
  const Eigen::Index J = spatial_dim();
  const Vector w = solve_forward(rho, modified_rhs(rho, u0, rhs));
  TruthTrajectory t;
  t.initial = u0;
  t.rho = rho;
  t.steps.reserve(static_cast<std::size_t>(grid().K));
  for (int k = 1; k <= grid().K; ++k) t.steps.emplace_back(block(w, k, J));
  return t;
}

Vector TruthSolver::spacetime_residual(const TruthTrajectory& trajectory, const RhsSpec& rhs) const {
  require(trajectory.K() == grid().K, "trajectory does not match the time grid");
  return modified_rhs(trajectory.rho, trajectory.initial, rhs) - op_.apply(trajectory.rho, trajectory.evolution());
}

double TruthSolver::xbar_norm(const TruthTrajectory& trajectory) const {
  return xbar_.norm(nodal_states(trajectory, init_));
}

}  // namespace strb::truth
