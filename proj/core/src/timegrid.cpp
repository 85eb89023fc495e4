#include "strb/timegrid.hpp"

#include <cmath>

#include "strb/error.hpp"

namespace strb::timegrid {

TimeGrid::TimeGrid(double horizon, int steps) : T(horizon), K(steps) {
  require(std::isfinite(horizon) && horizon > 0.0, "time horizon must be positive");
  require(steps >= 1, "need at least one time step");
}

TemporalMatrices temporal_matrices(const TimeGrid& grid) {
  const int K = grid.K;
  const double half = 0.5 * grid.dt();
  TemporalMatrices t;
  t.N = Matrix::Zero(K, K);
  t.M = Matrix::Zero(K, K);
  t.I = grid.dt() * Matrix::Identity(K, K);
  for (int k = 0; k < K; ++k) {
    t.N(k, k) = 1.0;
    t.M(k, k) = half;
    if (k + 1 < K) {
      t.N(k, k + 1) = -1.0;
      t.M(k, k + 1) = half;
    }
  }
  t.n_initial = Vector::Zero(K);
  t.m_initial = Vector::Zero(K);
  t.n_initial[0] = -1.0;
  t.m_initial[0] = half;
  return t;
}

SpaceTimeOperator::SpaceTimeOperator(TimeGrid grid, SparseMatrix mass, fem2d::AffineSpatialForms forms)
    : grid_(grid), temporal_(temporal_matrices(grid)), mass_(std::move(mass)), forms_(std::move(forms)) {
  require(mass_.rows() == mass_.cols() && mass_.rows() > 0, "mass matrix must be square");
  require(forms_.matrices.size() == forms_.thetas.size(), "affine forms inconsistent");
  for (const auto& a : forms_.matrices) {
    require(a.rows() == mass_.rows() && a.cols() == mass_.cols(), "affine term has wrong dimension");
  }
}

ThetaId SpaceTimeOperator::theta(int q) const {
  require(q >= 0 && q < num_terms(), "affine term index out of range");
  return q < static_cast<int>(forms_.num_terms()) ? forms_.thetas[static_cast<std::size_t>(q)] : ThetaId::One;
}

Vector SpaceTimeOperator::apply_impl(const Matrix& time, const SparseMatrix& space, const Vector& w,
                                     bool transpose) const {
  require(w.size() == dim(), "space-time vector has wrong length");
  const Eigen::Index J = spatial_dim();
  const int K = grid_.K;
  Vector out = Vector::Zero(dim());
  Vector spatial(J);
  for (int src = 1; src <= K; ++src) {
    if (transpose) {
      spatial.noalias() = space.transpose() * block(w, src, J);
    } else {
      spatial.noalias() = space * block(w, src, J);
    }
    for (int dst = 1; dst <= K; ++dst) {
      const double c = transpose ? time(dst - 1, src - 1) : time(src - 1, dst - 1);
      if (c != 0.0) block(out, dst, J) += c * spatial;
    }
  }
  return out;
}

Vector SpaceTimeOperator::apply_term(int q, const Vector& w) const {
  require(q >= 0 && q < num_terms(), "affine term index out of range");
  if (q == num_terms() - 1) return apply_impl(temporal_.N, mass_, w, false);
  return apply_impl(temporal_.M, forms_.matrices[static_cast<std::size_t>(q)], w, false);
}

Vector SpaceTimeOperator::apply_term_transpose(int q, const Vector& z) const {
  require(q >= 0 && q < num_terms(), "affine term index out of range");
  if (q == num_terms() - 1) return apply_impl(temporal_.N, mass_, z, true);
  return apply_impl(temporal_.M, forms_.matrices[static_cast<std::size_t>(q)], z, true);
}

Vector SpaceTimeOperator::apply(double rho, const Vector& w) const {
  Vector out = apply_term(num_terms() - 1, w);
  for (int q = 0; q + 1 < num_terms(); ++q) out += theta_value(theta(q), rho) * apply_term(q, w);
  return out;
}

Vector SpaceTimeOperator::apply_transpose(double rho, const Vector& z) const {
  Vector out = apply_term_transpose(num_terms() - 1, z);
  for (int q = 0; q + 1 < num_terms(); ++q) out += theta_value(theta(q), rho) * apply_term_transpose(q, z);
  return out;
}

InitSpace identity_init_space(const SparseMatrix& mass) {
  InitSpace s;
  s.embedding.resize(mass.rows(), mass.rows());
  s.embedding.setIdentity();
  s.gram = mass;
  s.identity = true;
  return s;
}

InitSpace make_init_space(const SparseMatrix& mass, SparseMatrix embedding) {
  require(embedding.rows() == mass.rows(), "initial-value basis functions must lie in V^J");
  require(embedding.cols() >= 1, "initial-value space is empty");
  InitSpace s;
  s.gram = SparseMatrix(embedding.transpose() * mass * embedding);
  s.embedding = std::move(embedding);
  s.identity = false;
  return s;
}

SparseMatrix CouplingMatrices::C(double rho) const {
  SparseMatrix c = -M_is;
  for (std::size_t q = 0; q < A_is.size(); ++q) c += (0.5 * dt * theta_value(thetas[q], rho)) * A_is[q];
  return c;
}

CouplingMatrices assemble_coupling(const SpaceTimeOperator& op, const InitSpace& init) {
  require(init.embedding.rows() == op.spatial_dim(), "initial-value basis functions not representable in V^J");
  CouplingMatrices c;
  c.dt = op.grid().dt();
  c.M_is = SparseMatrix((op.mass() * init.embedding).transpose());
  for (std::size_t q = 0; q < op.forms().num_terms(); ++q) {
    c.A_is.emplace_back(SparseMatrix((op.forms().matrices[q] * init.embedding).transpose()));
    c.thetas.push_back(op.forms().thetas[q]);
  }
  return c;
}

ZGramian::ZGramian(const TimeGrid& grid, const SparseMatrix& v_gramian)
    : dt_(grid.dt()), K_(grid.K), gram_(v_gramian),
      factor_(std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(v_gramian)) {
  if (factor_->info() != Eigen::Success) {
    throw NumericalError("V-Gramian factorization failed; check the mesh configuration");
  }
}

Vector ZGramian::apply(const Vector& v) const {
  const Eigen::Index J = gram_.rows();
  require(v.size() == J * K_, "space-time vector has wrong length");
  Vector out(v.size());
  for (int k = 1; k <= K_; ++k) block(out, k, J).noalias() = dt_ * (gram_ * block(v, k, J));
  return out;
}

Vector ZGramian::solve_spatial(const Vector& b) const { return factor_->solve(b); }

Vector ZGramian::apply_inverse(const Vector& v) const {
  const Eigen::Index J = gram_.rows();
  require(v.size() == J * K_, "space-time vector has wrong length");
  Vector out(v.size());
  for (int k = 1; k <= K_; ++k) block(out, k, J) = factor_->solve(Vector(block(v, k, J))) / dt_;
  return out;
}

double ZGramian::inner(const Vector& a, const Vector& b) const {
  const Eigen::Index J = gram_.rows();
  require(a.size() == J * K_ && b.size() == a.size(), "space-time vector has wrong length");
  double sum = 0.0;
  for (int k = 1; k <= K_; ++k) sum += block(a, k, J).dot(gram_ * block(b, k, J));
  return dt_ * sum;
}

double ZGramian::dual_norm(const Vector& r) const {
  return std::sqrt(std::max(0.0, r.dot(apply_inverse(r))));
}

}  // namespace strb::timegrid
