#pragma once

#include <string>
#include <vector>

#include "strb/fem2d.hpp"
#include "strb/linalg.hpp"
#include "strb/truth.hpp"

/// Two-step reduced basis method: a reduced space for the initial values and
/// a greedily trained evolution space with supremizer-stabilized test spaces.
namespace strb::rbm {

// ---------------------------------------------------------------- initial values

struct InitRB {
  Matrix basis;                     ///< M x N0 coefficients of h^1..h^N0, H-orthonormal
  Vector eigenvalues;               ///< POD spectrum in decreasing order (POD only)
  std::vector<int> selected;        ///< chosen candidates (greedy only)
  std::vector<double> max_errors;   ///< greedy: max R_{j,0} over the training set for j = 0..N0
  std::string warning;

  int N0() const { return static_cast<int>(basis.cols()); }
  /// The first n basis functions.
  InitRB truncated(int n) const;
};

/// POD of the candidates (coefficient vectors in H^M). Keeps `n_keep` modes,
/// or, if `n_keep` <= 0, the fewest modes whose discarded energy fraction is
/// below `energy_tol`. The count is capped at the numerical rank.
InitRB pod_init(const std::vector<Vector>& candidates, const SparseMatrix& M_init, int n_keep,
                double energy_tol = 0.0);

/// sqrt(sum_{i > n} lambda_i / sum_i lambda_i): relative projection error of the
/// candidate set onto the first n modes, in the Frobenius sense.
double pod_relative_error(const Vector& eigenvalues, int n);

/// Greedy on the projection error, orthonormalizing every chosen candidate.
InitRB init_greedy(const std::vector<Vector>& train, const SparseMatrix& M_init, double tol0, int n_max);

struct InitProjection {
  Vector alpha;       ///< coefficients w.r.t. the orthonormal basis
  double R_N0 = 0.0;  ///< ||mu0 - h_N(mu0)||_H
};

/// Projection of an H^M element.
InitProjection rb_init_project(const Vector& u0, const InitRB& basis, const SparseMatrix& M_init);

/// Data for projecting payoff splines without touching the mesh.
struct BernsteinFrame {
  Matrix gram;      ///< (B_l, B_l')_H, L x L
  Matrix coupling;  ///< (B_l, h^n)_H, L x N0

  bool empty() const { return gram.size() == 0; }
};

BernsteinFrame make_bernstein_frame(const Matrix& bernstein_gram, const Matrix& N_LM, const Matrix& init_basis);
/// Projection of the spline sum_l c_l B_l; R_N0 from the exact Gramian identity.
InitProjection rb_init_project(const BernsteinFrame& frame, const Vector& mu0_L);

// ---------------------------------------------------------------- reduced model

struct ReducedSolution {
  Vector alpha0;           ///< initial-value coefficients
  Vector wN;               ///< evolution coefficients
  double rho = 0.0;
  double R_N0 = 0.0;
  double R_N1 = 0.0;
  double sigma_min = -1.0; ///< smallest singular value of the reduced system, if requested
};

/// The persistable online data. Residual Riesz representers of all affine
/// pieces are stored by their coordinates in a Z-orthonormal basis, so the
/// residual dual norm is a Euclidean norm of a short vector.
///
/// Piece order: Q_g right-hand side terms, then N0 x Q_b initial-value terms
/// (index n * Q_b + q), then N1 x Q_b operator terms (same layout).
struct ReducedModel {
  std::vector<ThetaId> b_thetas;  ///< Q_b; the last one belongs to the time derivative
  std::vector<ThetaId> g_thetas;  ///< Q_g
  Matrix riesz;                   ///< r x (Q_g + (N0 + N1) Q_b)
  Matrix init_basis;              ///< M x N0
  Matrix evolution_basis;         ///< I x N1, Xbar-orthonormal
  BernsteinFrame bernstein;
  Eigen::Index J = 0;
  int K = 0;
  double T = 0.0;

  int N0() const { return static_cast<int>(init_basis.cols()); }
  int N1() const { return static_cast<int>(evolution_basis.cols()); }
  int Q_b() const { return static_cast<int>(b_thetas.size()); }
  int Q_g() const { return static_cast<int>(g_thetas.size()); }
  /// Number of right-hand side pieces, Q_g + N0 Q_b.
  int rhs_terms() const { return Q_g() + N0() * Q_b(); }

  /// Online solve for given initial-value coefficients. Cost depends on N0, N1, Q_b, Q_g only.
  ReducedSolution solve(const Vector& alpha0, double rho, bool with_sigma_min = false) const;
  /// Same for a payoff spline, projected in the Bernstein frame.
  ReducedSolution solve_payoff(const Vector& mu0_L, double rho, bool with_sigma_min = false) const;

  truth::ErrorBreakdown estimate(const ReducedSolution& solution, double beta_LB) const;

  /// u_N(0) in H^M coefficients and the evolution part in space-time coefficients.
  Vector initial_value(const ReducedSolution& solution) const { return init_basis * solution.alpha0; }
  Vector evolution(const ReducedSolution& solution) const { return evolution_basis * solution.wN; }
};

// ---------------------------------------------------------------- offline

struct TrainingSet {
  std::vector<Vector> init_candidates;  ///< in H^M coefficients
  std::vector<double> rho_grid;

  std::size_t size() const { return init_candidates.size() * rho_grid.size(); }
  /// Candidate-major: index = candidate * |rho_grid| + rho index.
  int candidate(std::size_t index) const { return static_cast<int>(index / rho_grid.size()); }
  double rho(std::size_t index) const { return rho_grid[index % rho_grid.size()]; }
};

TrainingSet product_training_set(std::vector<Vector> candidates, std::vector<double> rho_grid);

/// Builds the evolution space snapshot by snapshot and keeps the reduced model current.
class EvolutionTrainer {
 public:
  EvolutionTrainer(const truth::TruthSolver& solver, const InitRB& init, truth::RhsSpec rhs = {});

  /// Xbar-orthonormalizes `w` against the current basis (two passes) and appends it.
  /// Returns false, leaving the model unchanged, when `w` is numerically dependent.
  bool add_snapshot(const Vector& w);

  /// Evolution part of the detailed solution started from h_N(u0).
  Vector snapshot(const Vector& u0, double rho) const;

  /// Supremizer s^n(rho) = sum_q theta_q(rho) Z^{-1} B_q^T w^n.
  Vector supremizer(int n, double rho) const;

  const ReducedModel& model() const { return model_; }
  const truth::TruthSolver& solver() const { return solver_; }
  const truth::RhsSpec& rhs() const { return rhs_; }
  int riesz_rank() const { return static_cast<int>(riesz_basis_.size()); }

 private:
  /// Appends the representer Z^{-1} p as a new column of the coefficient matrix.
  void add_piece(const Vector& p);

  const truth::TruthSolver& solver_;
  truth::RhsSpec rhs_;
  ReducedModel model_;
  std::vector<Vector> riesz_basis_;  // Z-orthonormal
};

enum class Selector { Estimator, TrueError };

struct GreedyOptions {
  double tol = 1e-3;
  int n_max = 45;
  double beta_LB = 0.005;
  Selector selector = Selector::Estimator;
};

struct GreedyStep {
  int iteration = 0;      ///< N1 after this step
  int sample = -1;        ///< training index
  int candidate = -1;
  double rho = 0.0;
  double indicator = 0.0; ///< selected indicator value (before adding the snapshot)
};

struct GreedyResult {
  std::vector<GreedyStep> steps;
  std::vector<double> max_indicator;  ///< max over the training set for N1 = 0..final
  bool converged = false;
  std::string stop_reason;
};

/// Evolution greedy. With Selector::TrueError the training truth solutions are
/// computed up front and the selection uses the true Xbar error.
GreedyResult evolution_greedy(EvolutionTrainer& trainer, const TrainingSet& train, const GreedyOptions& options);

/// Nodal states u_N^0..u_N^K of a reduced solution in V^J coefficients.
std::vector<Vector> reduced_states(const truth::TruthSolver& solver, const ReducedModel& model,
                                   const ReducedSolution& solution);

/// Xbar error of the reduced solution against a detailed trajectory with the same rho.
double true_error(const truth::TruthSolver& solver, const ReducedModel& model, const ReducedSolution& solution,
                  const truth::TruthTrajectory& truth);

// ---------------------------------------------------------------- stability

struct InfSupBound {
  double coercive = 0.0;
  double time = 0.0;
  double combined = 0.0;
  bool coercive_valid = false;  ///< alpha_a - lambda_a varrho^2 > 0
};

InfSupBound infsup_lower_bound(const fem2d::StabilityConstants& c, double T);

}  // namespace strb::rbm
