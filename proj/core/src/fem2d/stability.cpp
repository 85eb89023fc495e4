#include <cmath>

#include <Eigen/SparseCholesky>

#include "strb/error.hpp"
#include "strb/fem2d.hpp"

namespace strb::fem2d {

double embedding_constant(const SparseMatrix& mass, const SparseMatrix& v_gramian, int iterations) {
  require(mass.rows() == v_gramian.rows() && mass.rows() > 0, "matrix dimensions differ");
  Eigen::SimplicialLLT<SparseMatrix> gram(v_gramian);
  if (gram.info() != Eigen::Success) throw NumericalError("V-Gramian is not positive definite");

  Vector x = Vector::Ones(mass.rows());
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    x = gram.solve(mass * x);
    x /= x.norm();
    const double next = x.dot(mass * x) / x.dot(v_gramian * x);
    if (std::abs(next - lambda) <= 1e-14 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

}  // namespace strb::fem2d
