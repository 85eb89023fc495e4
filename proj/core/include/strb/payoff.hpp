#pragma once

#include <string>
#include <vector>

#include "strb/fem2d.hpp"
#include "strb/linalg.hpp"
#include "strb/timegrid.hpp"

/// Payoff functions as piecewise linear (degree-1 Bernstein-Bezier) splines in
/// the log-price, constant in the volatility direction.
namespace strb::payoff {

struct BezierKnots {
  std::vector<double> v;  ///< strictly increasing log-price knots

  BezierKnots() = default;
  explicit BezierKnots(std::vector<double> knots);
  /// Knots at the logarithms of the given prices.
  static BezierKnots from_prices(const std::vector<double>& prices);

  int L() const { return static_cast<int>(v.size()); }
};

/// B_ell(y) for ell = 1..L: the hat with peak at v_ell, zero outside [v_1, v_L].
/// For L = 1 the single function is identically one.
double bernstein_hat_eval(const BezierKnots& knots, int ell, double y);

struct PayoffSpec {
  enum class Kind { Call, Put, Custom };
  Kind kind = Kind::Call;
  double strike = 0.0;
  std::vector<double> values;  ///< Custom: one value per knot

  static PayoffSpec call(double strike) { return {Kind::Call, strike, {}}; }
  static PayoffSpec put(double strike) { return {Kind::Put, strike, {}}; }
  static PayoffSpec custom(std::vector<double> values) { return {Kind::Custom, 0.0, std::move(values)}; }
};

/// Parses "call:K", "put:K" or "knots:c1,c2,...".
PayoffSpec parse_payoff(const std::string& text);
std::string to_string(const PayoffSpec& spec);

struct InitCoeffs {
  Vector mu0_L;  ///< mu0 evaluated at the knots
};

InitCoeffs payoff_coeffs(const PayoffSpec& spec, const BezierKnots& knots);

/// ((B_ell, psi_m)_H), L x M, integrated exactly by splitting triangles at the knot lines.
Matrix assemble_N_LM(const BezierKnots& knots, const fem2d::SpatialMesh& mesh, const timegrid::InitSpace& init);

/// ((B_ell, B_ell')_H) over the mesh domain, L x L, exact.
Matrix bernstein_gramian(const BezierKnots& knots, const fem2d::Rectangle& domain);

/// Degree-n Bernstein polynomial b_{i,n}(t) on [0, 1].
double bernstein_basis(int n, int i, double t);
/// Bezier curve with the given control values at t in [0, 1] (de Casteljau).
double bezier_eval(const std::vector<double>& control, double t);

}  // namespace strb::payoff
