#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "strb/error.hpp"
#include "strb/rbm.hpp"

namespace strb::rbm {

namespace {

constexpr double kRankTol = 1e-12;

// R^2 = ||x||^2 - sum alpha^2, clamped at round-off level.
double residual_norm(double norm_sq, const Vector& alpha) {
  const double r2 = norm_sq - alpha.squaredNorm();
  if (r2 < -1e-12 * std::max(1.0, norm_sq)) throw NumericalError("negative initial-value residual; basis not orthonormal?");
  return std::sqrt(std::max(0.0, r2));
}

// ||x - H alpha||_H computed directly; avoids the cancellation in the identity above.
double direct_residual(const Vector& x, const Matrix& basis, const Vector& alpha, const SparseMatrix& M_init) {
  const Vector r = x - basis * alpha;
  return std::sqrt(std::max(0.0, r.dot(M_init * r)));
}

}  // namespace

InitRB InitRB::truncated(int n) const {
  require(n >= 1 && n <= N0(), "cannot truncate to that many initial-value basis functions");
  InitRB out = *this;
  out.basis = basis.leftCols(n);
  if (!selected.empty()) out.selected.resize(static_cast<std::size_t>(n));
  return out;
}

InitRB pod_init(const std::vector<Vector>& candidates, const SparseMatrix& M_init, int n_keep, double energy_tol) {
  require(!candidates.empty(), "POD needs candidates");
  const Eigen::Index M = M_init.rows();
  Matrix X(M, static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    require(candidates[i].size() == M, "candidate has wrong length");
    X.col(static_cast<Eigen::Index>(i)) = candidates[i];
  }
  const Matrix MX = M_init * X;
  Matrix gram = X.transpose() * MX;
  gram = 0.5 * (gram + gram.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericalError("POD eigendecomposition failed");

  const Eigen::Index n = gram.rows();
  InitRB out;
  out.eigenvalues.resize(n);
  Matrix vectors(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues[i] = std::max(0.0, eig.eigenvalues()[n - 1 - i]);
    vectors.col(i) = eig.eigenvectors().col(n - 1 - i);
  }
  const double top = out.eigenvalues[0];
  int rank = 0;
  while (rank < n && out.eigenvalues[rank] > kRankTol * top) ++rank;
  require(rank > 0, "all POD candidates vanish");

  int keep = n_keep;
  if (keep <= 0) {
    keep = 1;
    while (keep < rank && pod_relative_error(out.eigenvalues, keep) * pod_relative_error(out.eigenvalues, keep) >
                              energy_tol) {
      ++keep;
    }
  }
  if (keep > rank) {
    out.warning = "requested " + std::to_string(keep) + " POD modes but the candidates have numerical rank " +
                  std::to_string(rank) + "; keeping " + std::to_string(rank);
    keep = rank;
  }
  out.basis.resize(M, keep);
  for (int i = 0; i < keep; ++i) {
    out.basis.col(i) = X * vectors.col(i) / std::sqrt(out.eigenvalues[i]);
  }
  return out;
}

double pod_relative_error(const Vector& eigenvalues, int n) {
  require(n >= 0 && n <= eigenvalues.size(), "mode count out of range");
  const double total = eigenvalues.sum();
  if (total <= 0.0) return 0.0;
  return std::sqrt(std::max(0.0, eigenvalues.tail(eigenvalues.size() - n).sum()) / total);
}

InitRB init_greedy(const std::vector<Vector>& train, const SparseMatrix& M_init, double tol0, int n_max) {
  require(!train.empty(), "initial-value greedy needs a training set");
  require(n_max >= 1, "n_max must be positive");
  const Eigen::Index M = M_init.rows();
  std::vector<Vector> m_train;
  std::vector<double> norms;
  for (const auto& x : train) {
    require(x.size() == M, "training element has wrong length");
    m_train.emplace_back(M_init * x);
    norms.push_back(x.dot(m_train.back()));
  }

  InitRB out;
  out.basis.resize(M, 0);
  while (true) {
    // Errors of all training elements against the current basis.
    int best = -1;
    double best_err = -1.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const Vector alpha = out.basis.transpose() * m_train[i];
      const double err = direct_residual(train[i], out.basis, alpha, M_init);
      if (err > best_err) {
        best_err = err;
        best = static_cast<int>(i);
      }
    }
    out.max_errors.push_back(best_err);
    // At least one function is always kept; an empty initial space is of no use downstream.
    if ((best_err <= tol0 && out.N0() >= 1) || out.N0() >= n_max) break;

    Vector h = train[static_cast<std::size_t>(best)];
    for (int pass = 0; pass < 2; ++pass) {
      h -= out.basis * (out.basis.transpose() * (M_init * h));
    }
    const double norm = std::sqrt(std::max(0.0, h.dot(M_init * h)));
    if (!(norm > kRankTol * std::sqrt(std::max(norms[static_cast<std::size_t>(best)], 1e-300)))) {
      // Exhausted training set: everything is reproduced up to round-off.
      const double scale = std::sqrt(*std::max_element(norms.begin(), norms.end()));
      if (best_err > 1e-10 * scale) {
        out.warning = "initial-value greedy stopped: selected candidate is numerically dependent";
      }
      break;
    }
    out.basis.conservativeResize(M, out.N0() + 1);
    out.basis.col(out.N0() - 1) = h / norm;
    out.selected.push_back(best);
  }
  require(out.N0() >= 1, "initial-value greedy selected nothing");
  return out;
}

InitProjection rb_init_project(const Vector& u0, const InitRB& basis, const SparseMatrix& M_init) {
  require(u0.size() == M_init.rows(), "initial value has wrong length");
  const Vector mu = M_init * u0;
  InitProjection p;
  p.alpha = basis.basis.transpose() * mu;
  p.R_N0 = direct_residual(u0, basis.basis, p.alpha, M_init);
  return p;
}

BernsteinFrame make_bernstein_frame(const Matrix& bernstein_gram, const Matrix& N_LM, const Matrix& init_basis) {
  require(bernstein_gram.rows() == N_LM.rows() && N_LM.cols() == init_basis.rows(), "Bernstein frame dimensions differ");
  return {bernstein_gram, N_LM * init_basis};
}

InitProjection rb_init_project(const BernsteinFrame& frame, const Vector& mu0_L) {
  require(!frame.empty(), "model has no Bernstein frame");
  require(mu0_L.size() == frame.gram.rows(), "payoff coefficients do not match the knots");
  InitProjection p;
  p.alpha = frame.coupling.transpose() * mu0_L;
  p.R_N0 = residual_norm(mu0_L.dot(frame.gram * mu0_L), p.alpha);
  return p;
}

}  // namespace strb::rbm
