#include <cmath>

#include "strb/error.hpp"
#include "strb/rbm.hpp"

namespace strb::rbm {

using timegrid::block;

namespace {

constexpr double kDependentTol = 1e-10;
constexpr double kRieszDropTol = 1e-13;

}  // namespace

EvolutionTrainer::EvolutionTrainer(const truth::TruthSolver& solver, const InitRB& init, truth::RhsSpec rhs)
    : solver_(solver), rhs_(std::move(rhs)) {
  const auto& op = solver_.op();
  require(init.basis.rows() == solver_.init_space().dim(), "initial-value basis does not match H^M");
  require(init.N0() >= 1, "initial-value basis is empty");
  const Eigen::Index J = op.spatial_dim();
  const int K = op.grid().K;
  const double dt = op.grid().dt();

  for (int q = 0; q < op.num_terms(); ++q) model_.b_thetas.push_back(op.theta(q));
  model_.init_basis = init.basis;
  model_.evolution_basis.resize(op.dim(), 0);
  model_.riesz.resize(0, 0);
  model_.J = J;
  model_.K = K;
  model_.T = op.grid().T;

  for (const auto& term : rhs_.terms) {
    require(static_cast<int>(term.nodal_loads.size()) == K + 1, "right-hand side needs K + 1 samples");
    model_.g_thetas.push_back(term.theta);
    Vector p(op.dim());
    for (int k = 1; k <= K; ++k) {
      block(p, k, J) = (0.5 * dt) * (term.nodal_loads[static_cast<std::size_t>(k - 1)] +
                                     term.nodal_loads[static_cast<std::size_t>(k)]);
    }
    add_piece(p);
  }

  // -b(sigma^0 (x) h^n, .) split by affine term; only the first test block is hit.
  const int Qa = static_cast<int>(op.forms().num_terms());
  for (int n = 0; n < init.N0(); ++n) {
    const Vector h = solver_.embed_initial(init.basis.col(n));
    for (int q = 0; q < op.num_terms(); ++q) {
      Vector p = Vector::Zero(op.dim());
      if (q < Qa) {
        block(p, 1, J) = (-0.5 * dt) * (op.forms().matrices[static_cast<std::size_t>(q)] * h);
      } else {
        block(p, 1, J) = op.mass() * h;
      }
      add_piece(p);
    }
  }
}

void EvolutionTrainer::add_piece(const Vector& p) {
  const auto& z = solver_.z_gramian();
  Vector y = z.apply_inverse(p);
  const double norm0 = std::sqrt(std::max(0.0, y.dot(p)));
  const Eigen::Index r = static_cast<Eigen::Index>(riesz_basis_.size());
  Vector coeffs = Vector::Zero(r);
  if (norm0 > 0.0) {
    for (int pass = 0; pass < 2; ++pass) {
      const Vector zy = pass == 0 ? p : z.apply(y);
      for (Eigen::Index j = 0; j < r; ++j) {
        const double c = riesz_basis_[static_cast<std::size_t>(j)].dot(zy);
        coeffs[j] += c;
        y -= c * riesz_basis_[static_cast<std::size_t>(j)];
      }
    }
  }
  const double rest = norm0 > 0.0 ? std::sqrt(std::max(0.0, y.dot(z.apply(y)))) : 0.0;
  const bool grow = rest > kRieszDropTol * norm0;

  const Eigen::Index cols = model_.riesz.cols();
  const Eigen::Index rows = r + (grow ? 1 : 0);
  Matrix next = Matrix::Zero(rows, cols + 1);
  if (r > 0 && cols > 0) next.topLeftCorner(r, cols) = model_.riesz;
  next.col(cols).head(r) = coeffs;
  if (grow) {
    next(r, cols) = rest;
    riesz_basis_.push_back(y / rest);
  }
  model_.riesz = std::move(next);
}

bool EvolutionTrainer::add_snapshot(const Vector& w_in) {
  const auto& op = solver_.op();
  require(w_in.size() == op.dim(), "snapshot has wrong length");
  const auto& xbar = solver_.xbar();
  Vector w = w_in;
  const double norm0 = xbar.norm_evolution(w);
  if (!(norm0 > 0.0) || !std::isfinite(norm0)) return false;
  Matrix& W = model_.evolution_basis;
  for (int pass = 0; pass < 2 && W.cols() > 0; ++pass) {
    const Vector c = W.transpose() * xbar.apply_evolution(w);
    w -= W * c;
  }
  const double norm = xbar.norm_evolution(w);
  if (!(norm > kDependentTol * norm0)) return false;
  w /= norm;

  W.conservativeResize(Eigen::NoChange, W.cols() + 1);
  W.col(W.cols() - 1) = w;
  for (int q = 0; q < op.num_terms(); ++q) add_piece(op.apply_term(q, w));
  return true;
}

Vector EvolutionTrainer::snapshot(const Vector& u0, double rho) const {
  InitRB basis;
  basis.basis = model_.init_basis;
  const InitProjection p = rb_init_project(u0, basis, solver_.init_space().gram);
  return solver_.solve(rho, model_.init_basis * p.alpha, rhs_).evolution();
}

Vector EvolutionTrainer::supremizer(int n, double rho) const {
  require(n >= 0 && n < model_.N1(), "snapshot index out of range");
  const int off = model_.rhs_terms() + n * model_.Q_b();
  Vector coeff = Vector::Zero(model_.riesz.rows());
  for (int q = 0; q < model_.Q_b(); ++q) {
    coeff += theta_value(model_.b_thetas[static_cast<std::size_t>(q)], rho) * model_.riesz.col(off + q);
  }
  Vector s = Vector::Zero(solver_.op().dim());
  for (Eigen::Index j = 0; j < coeff.size(); ++j) s += coeff[j] * riesz_basis_[static_cast<std::size_t>(j)];
  return s;
}

}  // namespace strb::rbm
