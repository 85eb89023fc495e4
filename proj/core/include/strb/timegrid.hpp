#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>

#include "strb/fem2d.hpp"
#include "strb/linalg.hpp"

/// Temporal bases and Kronecker-structured space-time operators.
///
/// Trial functions in time are the hats sigma^1..sigma^K (sigma^0 handles the
/// initial value), test functions the interval indicators tau^1..tau^K.
/// Space-time coefficient vectors of length I = K J are stored block by block:
/// block k (1-based) occupies entries [(k-1) J, k J).
namespace strb::timegrid {

struct TimeGrid {
  double T = 1.0;
  int K = 1;

  TimeGrid() = default;
  TimeGrid(double horizon, int steps);

  double dt() const { return T / K; }
  double node(int k) const { return k * dt(); }
};

/// Entry [k][l] (0-based for k, l = 1..K) holds (sigma-dot^k, tau^l) in N and
/// (sigma^k, tau^l) in M. The operator acting on trial coefficients is the
/// transpose, matching B^T w.
struct TemporalMatrices {
  Matrix N;          ///< delta_{k,l} - delta_{k+1,l}
  Matrix M;          ///< dt/2 (delta_{k,l} + delta_{k+1,l})
  Matrix I;          ///< (tau^k, tau^l) = dt Id
  Vector n_initial;  ///< (sigma-dot^0, tau^l) = -delta_{1,l}
  Vector m_initial;  ///< (sigma^0, tau^l) = dt/2 delta_{1,l}
};

TemporalMatrices temporal_matrices(const TimeGrid& grid);

/// Splits a space-time vector into its temporal blocks (views).
inline auto block(Vector& v, int k, Eigen::Index J) { return v.segment((k - 1) * J, J); }
inline auto block(const Vector& v, int k, Eigen::Index J) { return v.segment((k - 1) * J, J); }

/// B(rho) = N (x) M_space + M_time (x) A(rho), never materialized.
///
/// The affine terms are numbered q = 0..Q_a-1 for M_time (x) A_q and q = Q_a
/// for the time-derivative term N (x) M_space, so Q_b = Q_a + 1.
class SpaceTimeOperator {
 public:
  SpaceTimeOperator(TimeGrid grid, SparseMatrix mass, fem2d::AffineSpatialForms forms);

  const TimeGrid& grid() const { return grid_; }
  const TemporalMatrices& temporal() const { return temporal_; }
  const SparseMatrix& mass() const { return mass_; }
  const fem2d::AffineSpatialForms& forms() const { return forms_; }

  Eigen::Index spatial_dim() const { return mass_.rows(); }
  Eigen::Index dim() const { return spatial_dim() * grid_.K; }
  int num_terms() const { return static_cast<int>(forms_.num_terms()) + 1; }
  ThetaId theta(int q) const;

  /// B(rho)^T w: maps trial coefficients to the functional b_1(w, .) on the test basis.
  Vector apply(double rho, const Vector& w) const;
  /// B(rho) z.
  Vector apply_transpose(double rho, const Vector& z) const;
  /// B_q^T w for a single affine term.
  Vector apply_term(int q, const Vector& w) const;
  /// B_q z for a single affine term.
  Vector apply_term_transpose(int q, const Vector& z) const;

 private:
  Vector apply_impl(const Matrix& time, const SparseMatrix& space, const Vector& w, bool transpose) const;

  TimeGrid grid_;
  TemporalMatrices temporal_;
  SparseMatrix mass_;
  fem2d::AffineSpatialForms forms_;
};

/// Initial-value space H^M = span{psi_m} as a subspace of V^J.
struct InitSpace {
  /// J x M coefficients of psi_m in the nodal basis; identity when H^M = V^J.
  SparseMatrix embedding;
  /// M_init = ((psi_m', psi_m)_H).
  SparseMatrix gram;

  Eigen::Index dim() const { return embedding.cols(); }
  bool is_identity() const { return identity; }
  bool identity = false;
};

InitSpace identity_init_space(const SparseMatrix& mass);
InitSpace make_init_space(const SparseMatrix& mass, SparseMatrix embedding);

/// Coupling of the initial-value trial functions sigma^0 (x) psi_m with the first test block.
struct CouplingMatrices {
  SparseMatrix M_is;                ///< (psi_m, phi_j)_H, M x J
  std::vector<SparseMatrix> A_is;   ///< a_q(psi_m, phi_j), M x J, one per affine term
  std::vector<ThetaId> thetas;
  double dt = 0.0;

  /// C(rho) = -M_is + dt/2 A_is(rho).
  SparseMatrix C(double rho) const;
};

CouplingMatrices assemble_coupling(const SpaceTimeOperator& op, const InitSpace& init);

/// Z = I_time (x) G_space, the Gramian of L2(I; V) on the test space.
class ZGramian {
 public:
  ZGramian(const TimeGrid& grid, const SparseMatrix& v_gramian);

  Vector apply(const Vector& v) const;
  Vector apply_inverse(const Vector& v) const;
  double inner(const Vector& a, const Vector& b) const;
  /// sqrt(r^T Z^{-1} r).
  double dual_norm(const Vector& r) const;

  const SparseMatrix& spatial_gramian() const { return gram_; }
  /// Solves G x = b for a single spatial block.
  Vector solve_spatial(const Vector& b) const;
  double dt() const { return dt_; }
  int blocks() const { return K_; }

 private:
  double dt_;
  int K_;
  SparseMatrix gram_;
  std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>> factor_;
};

}  // namespace strb::timegrid
