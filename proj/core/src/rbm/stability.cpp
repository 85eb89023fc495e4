#include <algorithm>
#include <cmath>

#include "strb/error.hpp"
#include "strb/rbm.hpp"

namespace strb::rbm {

namespace {

double coercive_bound(double alpha, double lambda, double Ma, double varrho, double beta_star, double Me) {
  const double num = std::min(std::min(1.0, 1.0 / (Ma * Ma)) * (alpha - lambda * varrho * varrho), 1.0);
  return num / std::sqrt(2.0 * std::max(1.0, 1.0 / (beta_star * beta_star)) + Me * Me);
}

}  // namespace

InfSupBound infsup_lower_bound(const fem2d::StabilityConstants& c, double T) {
  require(c.continuity > 0.0 && c.embedding > 0.0 && c.spatial_infsup > 0.0 && T > 0.0,
          "stability constants must be positive");
  InfSupBound b;
  const double vr2 = c.embedding * c.embedding;
  b.coercive_valid = c.garding_alpha - c.garding_lambda * vr2 > 0.0;
  b.coercive = b.coercive_valid ? coercive_bound(c.garding_alpha, c.garding_lambda, c.continuity, c.embedding,
                                                 c.spatial_infsup, c.initial_trace)
                                : 0.0;
  const double base = coercive_bound(c.garding_alpha, 0.0, c.continuity + c.garding_lambda * vr2, c.embedding,
                                     c.spatial_infsup, c.initial_trace);
  b.time = std::max(0.0, base) * std::exp(-2.0 * c.garding_lambda * T) /
           std::sqrt(std::max(2.0, 1.0 + 2.0 * c.garding_lambda * c.garding_lambda * vr2 * vr2));
  b.combined = std::max(b.coercive, b.time);
  return b;
}

}  // namespace strb::rbm
