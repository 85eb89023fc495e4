#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "strb/problem.hpp"

namespace strb::app {

/// Invalid or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InitMethod { Pod, Greedy };

struct TrainingConfig {
  InitMethod init = InitMethod::Pod;
  int n0 = 5;              ///< initial-value basis size (maximum for the greedy)
  int n_init_train = 5;    ///< leading initial-value modes used as evolution training candidates
  double tol0 = 0.0;
  double rho_min = -0.5;
  double rho_max = 0.5;
  int rho_count = 12;
  double tol1 = 1e-3;
  int n_max = 45;
  double beta_lb = 0.005;
};

struct ViewConfig {
  double s_min = 1e-8;
  double s_max = 190.0;
  double nu_min = 0.05;
  double nu_max = 0.95;
};

struct RunConfig {
  ProblemConfig problem;
  double rho_domain_min = -1.0;
  double rho_domain_max = 1.0;
  TrainingConfig training;
  std::string payoff = "call:70";
  double rho = 0.3;
  double sweep_rho_min = -1.0;
  double sweep_rho_max = 1.0;
  int sweep_count = 201;
  ViewConfig view;
  std::string output_dir = "out";
  unsigned long long seed = 1;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

/// INI text with sections [mesh] [time] [heston] [payoff] [parameter]
/// [training] [online] [sweep] [view] [output] [run]. Missing keys keep
/// their defaults; unknown sections or keys are rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Canonical text: every key, doubles with 17 significant digits.
std::string serialize_config(const RunConfig& config);

}  // namespace strb::app
