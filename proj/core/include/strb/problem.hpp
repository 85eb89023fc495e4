#pragma once

#include <memory>
#include <vector>

#include "strb/fem2d.hpp"
#include "strb/payoff.hpp"
#include "strb/timegrid.hpp"
#include "strb/truth.hpp"

/// Assembly of the complete Heston pricing discretization from a handful of data.
namespace strb {

struct MeshConfig {
  double s_min = 1e-8;
  double s_max = 200.0;
  double nu_min = 0.05;
  double nu_max = 1.0;
  int nx = 80;
  int ny = 45;
  /// Align y-lines with the payoff knots; otherwise a uniform grid.
  bool knot_aligned = true;
  /// Cells per knot interval proportional to (interval length)^grading_power.
  double grading_power = 0.5;
};

struct ProblemConfig {
  MeshConfig mesh;
  double T = 0.25;
  int K = 25;
  fem2d::HestonCoefficients heston;
  std::vector<double> knot_prices{1e-8, 70.0, 80.0, 90.0, 100.0, 110.0, 200.0};
};

fem2d::SpatialMesh build_mesh(const MeshConfig& config, const payoff::BezierKnots& knots);

/// Everything the reduced basis method needs from the detailed model.
struct Problem {
  ProblemConfig config;
  fem2d::SpatialMesh mesh;
  SparseMatrix mass;
  SparseMatrix v_gramian;
  payoff::BezierKnots knots;
  Matrix N_LM;        ///< L x M, with H^M = V^J
  Matrix bernstein;   ///< L x L Gramian of the knot hats
  std::unique_ptr<truth::TruthSolver> truth;

  Eigen::Index J() const { return mass.rows(); }
  /// H-orthogonal projection of the payoff spline onto H^M.
  Vector project(const Vector& mu0_L) const;
};

std::unique_ptr<Problem> build_problem(const ProblemConfig& config);

}  // namespace strb
