#include "strb/problem.hpp"

#include <cmath>

#include "strb/error.hpp"

namespace strb {

fem2d::SpatialMesh build_mesh(const MeshConfig& c, const payoff::BezierKnots& knots) {
  require(c.s_min > 0.0 && c.s_max > c.s_min, "price range must satisfy 0 < s_min < s_max");
  require(c.nu_min > 0.0 && c.nu_max > c.nu_min, "volatility range must satisfy 0 < nu_min < nu_max");
  require(c.nx >= 2 && c.ny >= 2, "mesh needs at least two cells per direction");
  const double y0 = std::log(c.s_min);
  const double y1 = std::log(c.s_max);
  auto nu_lines = fem2d::uniform_lines(c.nu_min, c.nu_max, c.ny);
  if (!c.knot_aligned) return fem2d::SpatialMesh(fem2d::uniform_lines(y0, y1, c.nx), std::move(nu_lines));

  // Breakpoints: domain ends plus every knot strictly inside.
  std::vector<double> breaks{y0};
  for (double v : knots.v) {
    if (v > y0 + 1e-12 && v < y1 - 1e-12) breaks.push_back(v);
  }
  breaks.push_back(y1);
  std::vector<double> weights;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    weights.push_back(std::pow(breaks[i + 1] - breaks[i], c.grading_power));
  }
  return fem2d::SpatialMesh(fem2d::knot_aligned_lines(breaks, c.nx, weights, 2), std::move(nu_lines));
}

Vector Problem::project(const Vector& mu0_L) const {
  require(mu0_L.size() == knots.L(), "payoff coefficients do not match the knots");
  return truth->solve_init_gram(N_LM.transpose() * mu0_L);
}

std::unique_ptr<Problem> build_problem(const ProblemConfig& config) {
  config.heston.validate();
  auto p = std::make_unique<Problem>(Problem{config, build_mesh(config.mesh, payoff::BezierKnots::from_prices(config.knot_prices)),
                                             {}, {}, payoff::BezierKnots::from_prices(config.knot_prices), {}, {}, nullptr});
  p->mass = fem2d::assemble_mass(p->mesh);
  p->v_gramian = fem2d::assemble_v_gramian(p->mesh);
  auto forms = fem2d::assemble_heston_affine(p->mesh, config.heston);
  auto init = timegrid::identity_init_space(p->mass);
  p->N_LM = payoff::assemble_N_LM(p->knots, p->mesh, init);
  p->bernstein = payoff::bernstein_gramian(p->knots, p->mesh.domain());
  timegrid::SpaceTimeOperator op(timegrid::TimeGrid(config.T, config.K), p->mass, std::move(forms));
  p->truth = std::make_unique<truth::TruthSolver>(std::move(op), std::move(init), p->v_gramian);
  return p;
}

}  // namespace strb
