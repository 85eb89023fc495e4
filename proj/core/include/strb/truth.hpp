#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "strb/fem2d.hpp"
#include "strb/linalg.hpp"
#include "strb/timegrid.hpp"

/// Detailed ("truth") space-time solver: initial-value projection followed by
/// Crank-Nicolson evolution, which is algebraically identical to the
/// space-time Petrov-Galerkin system B(rho)^T w = f(u0, rho).
namespace strb::truth {

/// One affine right-hand side term g_q(t) with its parameter function.
struct RhsTerm {
  ThetaId theta = ThetaId::One;
  /// <g_q(t^k), phi_j> at the K+1 time nodes.
  std::vector<Vector> nodal_loads;
};

/// g(rho; t) = sum_q theta_q(rho) g_q(t). No terms means a zero right-hand side.
struct RhsSpec {
  std::vector<RhsTerm> terms;

  bool empty() const { return terms.empty(); }
  /// Trapezoidal average (g(t^{k-1}) + g(t^k)) / 2 for k = 1..K.
  Vector midpoint_load(double rho, int k) const;
};

/// Samples `load(t)` (a functional on the dofs) at the nodes of `grid`.
RhsTerm sample_rhs_term(const timegrid::TimeGrid& grid, ThetaId theta,
                        const std::function<Vector(double)>& load);

struct TruthTrajectory {
  Vector initial;              ///< u^0 in H^M coefficients
  std::vector<Vector> steps;   ///< u^1..u^K in V^J coefficients
  double rho = 0.0;

  int K() const { return static_cast<int>(steps.size()); }
  /// The evolution part w (blocks u^1..u^K) as one space-time vector.
  Vector evolution() const;
};

/// Full trajectory states u^0..u^K in V^J coefficients.
std::vector<Vector> nodal_states(const TruthTrajectory& trajectory, const timegrid::InitSpace& init);
/// States 0, w^1..w^K of an evolution vector (w^0 = 0).
std::vector<Vector> evolution_states(const Vector& w, Eigen::Index J, int K);

/// Solves M_init^T u0 = N_LM^T mu0, the H-orthogonal projection onto H^M.
Vector project_initial(const Vector& mu0_coeffs, const Matrix& N_LM, const SparseMatrix& M_init);

/// Error contributions of a reduced solution.
struct ErrorBreakdown {
  double R_N0 = 0.0;     ///< initial-value residual ||mu0 - h_N(mu0)||_H
  double R_N1 = 0.0;     ///< evolution residual dual norm ||r_N1||_{Z'}
  double beta_LB = 0.0;  ///< inf-sup lower bound used
  double delta = 0.0;    ///< (R_N0 + R_N1) / beta_LB
  double delta1 = 0.0;   ///< R_N1 / beta_LB

  static ErrorBreakdown make(double r0, double r1, double beta_lb);
};

/// Gramian of the discrete space-time norm
///   ||w||^2 = sum_k dt ||(w^{k-1} + w^k) / 2||_V^2 + sum_k dt ||(w^k - w^{k-1}) / dt||_{V'}^2 + ||w^K||_H^2
/// for piecewise linear trajectories given by their nodal states.
class XbarNorm {
 public:
  XbarNorm(const timegrid::TimeGrid& grid, SparseMatrix mass, SparseMatrix v_gramian);

  /// Returns g with <u, v> = sum_k u_k^T g_k for every v (g = Xbar v, by node).
  std::vector<Vector> apply(const std::vector<Vector>& states) const;
  double inner(const std::vector<Vector>& a, const std::vector<Vector>& b) const;
  double norm(const std::vector<Vector>& states) const;

  /// Same operations for evolution vectors (w^0 = 0), returned as one space-time vector.
  Vector apply_evolution(const Vector& w) const;
  double norm_evolution(const Vector& w) const;

  /// ||d||_{V'} for the functional v -> (d, v)_H.
  double dual_norm_h(const Vector& d) const;

  Eigen::Index spatial_dim() const { return mass_.rows(); }
  int K() const { return K_; }

 private:
  double dt_;
  int K_;
  SparseMatrix mass_;
  SparseMatrix gram_;
  std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>> factor_;
};

/// The Crank-Nicolson truth solver for one spatial/temporal discretization.
///
/// Step factorizations (M/dt + A(rho)/2) are computed once per rho and cached;
/// the solver is safe to share between threads.
class TruthSolver {
 public:
  TruthSolver(timegrid::SpaceTimeOperator op, timegrid::InitSpace init, SparseMatrix v_gramian);

  const timegrid::SpaceTimeOperator& op() const { return op_; }
  const timegrid::InitSpace& init_space() const { return init_; }
  const timegrid::CouplingMatrices& coupling() const { return coupling_; }
  const timegrid::ZGramian& z_gramian() const { return z_; }
  const XbarNorm& xbar() const { return xbar_; }
  const timegrid::TimeGrid& grid() const { return op_.grid(); }
  Eigen::Index spatial_dim() const { return op_.spatial_dim(); }

  /// Crank-Nicolson evolution from the H^M initial coefficients `u0`.
  TruthTrajectory solve(double rho, const Vector& u0, const RhsSpec& rhs = {}) const;

  /// f(u0, rho): the space-time right-hand side for the evolution part.
  Vector modified_rhs(double rho, const Vector& u0, const RhsSpec& rhs = {}) const;

  /// f(u0, rho) - B(rho)^T w for the evolution part of `trajectory`.
  Vector spacetime_residual(const TruthTrajectory& trajectory, const RhsSpec& rhs = {}) const;

  /// Solves B(rho)^T w = f block by block (forward in time).
  Vector solve_forward(double rho, const Vector& f) const;
  /// Solves B(rho) z = f block by block (backward in time).
  Vector solve_adjoint(double rho, const Vector& f) const;

  /// Solves M_init x = b.
  Vector solve_init_gram(const Vector& b) const;
  /// Initial-value coefficients embedded into V^J.
  Vector embed_initial(const Vector& u0) const;

  double xbar_norm(const TruthTrajectory& trajectory) const;
  double dual_norm_Z(const Vector& residual) const { return z_.dual_norm(residual); }

  void clear_cache() const;

 private:
  // Step matrices scaled by dt: implicit = M + dt/2 A(rho), explicit_part = -M + dt/2 A(rho).
  struct StepFactor {
    SparseMatrix implicit;
    SparseMatrix explicit_part;
    std::unique_ptr<Eigen::SimplicialLLT<SparseMatrix>> llt;  // used when A(rho) is symmetric
    std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu;
    Vector solve(const Vector& b, bool transpose) const;
  };
  std::shared_ptr<const StepFactor> factor(double rho) const;

  timegrid::SpaceTimeOperator op_;
  timegrid::InitSpace init_;
  timegrid::CouplingMatrices coupling_;
  timegrid::ZGramian z_;
  XbarNorm xbar_;
  Eigen::SimplicialLLT<SparseMatrix> init_factor_;

  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::shared_ptr<const StepFactor>> cache_;
};

struct InfSupEstimate {
  double value = 0.0;      ///< converged Rayleigh quotient (upper estimate of the constant)
  int iterations = 0;
  double last_change = 0.0;
};

/// Smallest singular value of the full discrete space-time operator
/// (u0, w) -> (b_1(u, .), (u(0), .)_H) from the Xbar norm into Y' = (Z x H)',
/// by inverse iteration. Each step costs two block solves.
InfSupEstimate discrete_infsup(const TruthSolver& solver, double rho, int max_iterations = 60,
                               double tolerance = 1e-6);

}  // namespace strb::truth
