#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "strb/model_io.hpp"
#include "strb/problem.hpp"
#include "strb/rbm.hpp"

namespace strb::app {

/// Projected knot hats B_1..B_L, the raw material of the initial-value basis.
std::vector<Vector> hat_candidates(const Problem& problem);

/// Initial-value basis with as many functions as the method yields (POD: all
/// modes up to the numerical rank; greedy: up to n0).
rbm::InitRB full_initial_basis(const RunConfig& config, const Problem& problem);

std::vector<double> rho_training_grid(const TrainingConfig& t);

struct TrainedModel {
  rbm::ModelBundle bundle;
  rbm::InitRB init_full;
  rbm::GreedyResult greedy;
  double seconds_init = 0.0;
  double seconds_greedy = 0.0;
};

/// Offline phase: reduced initial values of size n0, evolution greedy over the
/// first n_init_train initial-value functions times the rho grid.
TrainedModel train(const RunConfig& config, const Problem& problem,
                   rbm::Selector selector = rbm::Selector::Estimator);

/// A query initial value: either a payoff spec or "basis:i" (1-based h^i).
struct Query {
  std::optional<payoff::PayoffSpec> spec;
  int basis_index = 0;
};
Query parse_query(const std::string& text);

rbm::ReducedSolution solve_query(const rbm::ReducedModel& model, const payoff::BezierKnots& knots, const Query& q,
                                 double rho);
/// The detailed initial value (H^M coefficients) of a query.
Vector truth_initial(const Problem& problem, const rbm::ReducedModel& model, const Query& q);

/// Xbar norm restricted to the view window.
class WindowNorm {
 public:
  WindowNorm(const Problem& problem, const ViewConfig& view);
  double norm(const std::vector<Vector>& states) const;

 private:
  fem2d::WindowMatrices window_;
  truth::XbarNorm xbar_;
};

/// One row of the initial-value basis / training set comparison.
struct ScenarioResult {
  int n0 = 0;
  int n_init_train = 0;
  std::size_t training_size = 0;
  int N1 = 0;
  double error_window = 0.0;
  double error_full = 0.0;
  double delta = 0.0;
  double seconds_greedy = 0.0;
  std::string stop_reason;
};

/// Trains with N0 in {5, 7} and 5 or 7 training candidates and measures the
/// error of the configured query against the detailed solution.
std::vector<ScenarioResult> run_scenarios(const RunConfig& config, const Problem& problem);

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path model;
  std::filesystem::path out;
  bool truth = false;
  std::optional<unsigned long long> seed;
  std::optional<std::string> payoff;
  std::optional<double> rho;
};

/// Each command returns the process exit code; ConfigError and ModelError propagate.
int cmd_validate_config(const CommandOptions& options, std::ostream& out);
int cmd_offline(const CommandOptions& options, std::ostream& log);
int cmd_online(const CommandOptions& options, std::ostream& log);
int cmd_sweep(const CommandOptions& options, std::ostream& log);
int cmd_scenarios(const CommandOptions& options, std::ostream& log);

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace strb::app
