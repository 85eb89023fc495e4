#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace strb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Column-major compressed sparse matrix; finalized matrices never hold duplicate entries.
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Parameter functions of an affine decomposition. Kept as identifiers (not
/// closures) so trained models can be persisted and reloaded.
enum class ThetaId { One, Rho };

inline double theta_value(ThetaId id, double rho) {
  return id == ThetaId::Rho ? rho : 1.0;
}

const char* to_string(ThetaId id);
ThetaId theta_from_string(const char* name);

}  // namespace strb
