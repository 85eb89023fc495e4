#pragma once

#include <random>

#include "strb/problem.hpp"

namespace strb::test {

/// A coarse Heston problem (J in the low hundreds) for fast checks.
inline ProblemConfig small_config(int nx = 16, int ny = 8, int K = 10) {
  ProblemConfig c;
  c.mesh.nx = nx;
  c.mesh.ny = ny;
  c.K = K;
  return c;
}

inline Matrix dense(const SparseMatrix& s) { return Matrix(s); }

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

inline Vector random_vector(Eigen::Index n, std::mt19937& rng) {
  std::normal_distribution<double> d;
  Vector v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline double rel_diff(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

}  // namespace strb::test
