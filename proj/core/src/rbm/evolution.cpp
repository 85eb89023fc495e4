#include <cmath>
#include <limits>

#include "strb/error.hpp"
#include "strb/rbm.hpp"

namespace strb::rbm {

TrainingSet product_training_set(std::vector<Vector> candidates, std::vector<double> rho_grid) {
  require(!candidates.empty() && !rho_grid.empty(), "training set must not be empty");
  return {std::move(candidates), std::move(rho_grid)};
}

GreedyResult evolution_greedy(EvolutionTrainer& trainer, const TrainingSet& train, const GreedyOptions& options) {
  require(train.size() > 0, "training set must not be empty");
  require(options.beta_LB > 0.0, "inf-sup lower bound must be positive");
  require(options.n_max >= 1, "n_max must be positive");
  const auto& solver = trainer.solver();
  const SparseMatrix& M_init = solver.init_space().gram;

  InitRB basis;
  basis.basis = trainer.model().init_basis;
  std::vector<Vector> alphas;
  for (const auto& c : train.init_candidates) alphas.push_back(rb_init_project(c, basis, M_init).alpha);

  std::vector<truth::TruthTrajectory> truths;
  if (options.selector == Selector::TrueError) {
    for (std::size_t i = 0; i < train.size(); ++i) {
      truths.push_back(solver.solve(train.rho(i), train.init_candidates[static_cast<std::size_t>(train.candidate(i))],
                                    trainer.rhs()));
    }
  }

  GreedyResult result;
  double last_selected = std::numeric_limits<double>::infinity();
  while (true) {
    const ReducedModel& model = trainer.model();
    int best = -1;
    double best_value = -1.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const ReducedSolution s = model.solve(alphas[static_cast<std::size_t>(train.candidate(i))], train.rho(i));
      const double value = options.selector == Selector::Estimator ? s.R_N1 / options.beta_LB
                                                                  : true_error(solver, model, s, truths[i]);
      if (value > best_value) {
        best_value = value;
        best = static_cast<int>(i);
      }
    }
    result.max_indicator.push_back(best_value);

    if (model.N1() >= 1 && best_value < options.tol) {
      result.converged = true;
      result.stop_reason = "tolerance reached";
      break;
    }
    if (model.N1() >= options.n_max) {
      result.stop_reason = "maximal basis size reached";
      break;
    }
    if (best_value > 10.0 * last_selected) {
      result.stop_reason = "stagnation: selected indicator grew by more than a factor of 10";
      break;
    }

    const std::size_t idx = static_cast<std::size_t>(best);
    const int cand = train.candidate(idx);
    const Vector w = trainer.snapshot(train.init_candidates[static_cast<std::size_t>(cand)], train.rho(idx));
    if (!trainer.add_snapshot(w)) {
      result.stop_reason = "stagnation: selected snapshot is numerically dependent on the basis";
      break;
    }
    last_selected = best_value;
    result.steps.push_back({trainer.model().N1(), best, cand, train.rho(idx), best_value});
  }
  return result;
}

}  // namespace strb::rbm
