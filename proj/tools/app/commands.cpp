#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <CLI11.hpp>

#include "strb/error.hpp"
#include "strb/io.hpp"

namespace strb::app {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RunConfig resolve_config(const CommandOptions& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.payoff) c.payoff = *o.payoff;
  if (o.rho) c.rho = *o.rho;
  c.validate();
  return c;
}

std::filesystem::path output_dir(const CommandOptions& o, const RunConfig& c) {
  return o.out.empty() ? std::filesystem::path(c.output_dir) : o.out;
}

std::filesystem::path model_path(const CommandOptions& o, const RunConfig& c) {
  return o.model.empty() ? output_dir(o, c) / "model.strb" : o.model;
}

void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

struct LoadedModel {
  rbm::ModelBundle bundle;
  RunConfig config;
  payoff::BezierKnots knots;
};

LoadedModel load(const std::filesystem::path& path) {
  LoadedModel m;
  m.bundle = rbm::load_model(path);
  try {
    m.config = parse_config(m.bundle.config_text);
  } catch (const ConfigError& e) {
    throw ModelError(std::string("model carries an unreadable config: ") + e.what());
  }
  m.knots = payoff::BezierKnots(m.bundle.knots);
  return m;
}

void check_matches(const Problem& problem, const rbm::ReducedModel& model) {
  if (problem.J() != model.J || problem.config.K != model.K) {
    throw ModelError("model dimensions do not match its configuration");
  }
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1));
  return xs;
}

std::string surface_csv(const fem2d::SpatialMesh& mesh, const Vector& dofs, const ViewConfig& view) {
  std::ostringstream os;
  io::CsvWriter csv(os, {"y", "nu", "S", "u"});
  const Vector values = fem2d::extend_to_vertices(mesh, dofs);
  const double y0 = std::log(view.s_min);
  const double y1 = std::log(view.s_max);
  for (std::size_t v = 0; v < mesh.vertices().size(); ++v) {
    const auto& p = mesh.vertices()[v];
    if (p.y < y0 - 1e-12 || p.y > y1 + 1e-12 || p.nu < view.nu_min - 1e-12 || p.nu > view.nu_max + 1e-12) continue;
    csv << p.y << p.nu << std::exp(p.y) << values[static_cast<Eigen::Index>(v)];
    csv.end_row();
  }
  return os.str();
}

bool in_training_range(const RunConfig& c, double rho) {
  return rho >= c.training.rho_min && rho <= c.training.rho_max;
}

}  // namespace

std::vector<Vector> hat_candidates(const Problem& problem) {
  std::vector<Vector> out;
  for (int l = 0; l < problem.knots.L(); ++l) {
    Vector e = Vector::Zero(problem.knots.L());
    e[l] = 1.0;
    out.push_back(problem.project(e));
  }
  return out;
}

rbm::InitRB full_initial_basis(const RunConfig& config, const Problem& problem) {
  const auto hats = hat_candidates(problem);
  if (config.training.init == InitMethod::Pod) {
    return rbm::pod_init(hats, problem.truth->init_space().gram, static_cast<int>(hats.size()));
  }
  return rbm::init_greedy(hats, problem.truth->init_space().gram, config.training.tol0, config.training.n0);
}

std::vector<double> rho_training_grid(const TrainingConfig& t) {
  return linspace(t.rho_min, t.rho_max, t.rho_count);
}

TrainedModel train(const RunConfig& config, const Problem& problem, rbm::Selector selector) {
  TrainedModel out;
  auto start = Clock::now();
  out.init_full = full_initial_basis(config, problem);
  const int n0 = std::min(config.training.n0, out.init_full.N0());
  const rbm::InitRB init = out.init_full.truncated(n0);
  std::vector<Vector> candidates;
  for (int i = 0; i < std::min(config.training.n_init_train, out.init_full.N0()); ++i) {
    candidates.emplace_back(out.init_full.basis.col(i));
  }
  out.seconds_init = seconds_since(start);

  start = Clock::now();
  rbm::EvolutionTrainer trainer(*problem.truth, init);
  rbm::GreedyOptions options;
  options.tol = config.training.tol1;
  options.n_max = config.training.n_max;
  options.beta_LB = config.training.beta_lb;
  options.selector = selector;
  out.greedy = rbm::evolution_greedy(trainer, rbm::product_training_set(candidates, rho_training_grid(config.training)),
                                     options);
  out.seconds_greedy = seconds_since(start);

  out.bundle.model = trainer.model();
  out.bundle.model.bernstein = rbm::make_bernstein_frame(problem.bernstein, problem.N_LM, init.basis);
  out.bundle.config_text = serialize_config(config);
  out.bundle.knots = problem.knots.v;
  out.bundle.init_eigenvalues = out.init_full.eigenvalues;
  return out;
}

Query parse_query(const std::string& text) {
  Query q;
  if (text.rfind("basis:", 0) == 0) {
    try {
      std::size_t used = 0;
      q.basis_index = std::stoi(text.substr(6), &used);
      if (used != text.size() - 6) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError("invalid payoff '" + text + "': expected basis:<index>");
    }
    if (q.basis_index < 1) throw ConfigError("basis index must be at least 1");
    return q;
  }
  try {
    q.spec = payoff::parse_payoff(text);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid payoff: ") + e.what());
  }
  return q;
}

rbm::ReducedSolution solve_query(const rbm::ReducedModel& model, const payoff::BezierKnots& knots, const Query& q,
                                 double rho) {
  if (!q.spec) {
    if (q.basis_index > model.N0()) {
      throw ConfigError("basis index " + std::to_string(q.basis_index) + " exceeds N0 = " + std::to_string(model.N0()));
    }
    return model.solve(Vector::Unit(model.N0(), q.basis_index - 1), rho);
  }
  return model.solve_payoff(payoff::payoff_coeffs(*q.spec, knots).mu0_L, rho);
}

Vector truth_initial(const Problem& problem, const rbm::ReducedModel& model, const Query& q) {
  if (!q.spec) return model.init_basis.col(q.basis_index - 1);
  return problem.project(payoff::payoff_coeffs(*q.spec, problem.knots).mu0_L);
}

WindowNorm::WindowNorm(const Problem& problem, const ViewConfig& view)
    : window_(fem2d::window_matrices(problem.mesh, {std::log(view.s_min), std::log(view.s_max), view.nu_min,
                                                    view.nu_max})),
      xbar_(problem.truth->grid(), window_.mass, window_.v_gramian) {}

double WindowNorm::norm(const std::vector<Vector>& states) const {
  std::vector<Vector> restricted;
  restricted.reserve(states.size());
  for (const auto& s : states) restricted.push_back(window_.restrict(s));
  return xbar_.norm(restricted);
}

int cmd_validate_config(const CommandOptions& options, std::ostream& out) {
  out << serialize_config(resolve_config(options));
  return 0;
}

int cmd_offline(const CommandOptions& options, std::ostream& log) {
  const RunConfig config = resolve_config(options);
  const auto dir = output_dir(options, config);
  const auto start = Clock::now();
  const auto problem = build_problem(config.problem);
  const double seconds_setup = seconds_since(start);
  const TrainedModel t = train(config, *problem);

  prepare_dir(dir);
  rbm::save_model(model_path(options, config), t.bundle);

  std::ostringstream eig;
  {
    io::CsvWriter csv(eig, {"index", "eigenvalue", "relative_error"});
    for (Eigen::Index i = 0; i < t.init_full.eigenvalues.size(); ++i) {
      csv << static_cast<long long>(i + 1) << t.init_full.eigenvalues[i]
          << rbm::pod_relative_error(t.init_full.eigenvalues, static_cast<int>(i + 1));
      csv.end_row();
    }
  }
  io::write_file_atomic(dir / "init_eigenvalues.csv", eig.str());

  std::ostringstream decay;
  {
    io::CsvWriter csv(decay, {"n1", "max_estimator"});
    for (std::size_t i = 0; i < t.greedy.max_indicator.size(); ++i) {
      csv << i << t.greedy.max_indicator[i];
      csv.end_row();
    }
  }
  io::write_file_atomic(dir / "greedy_decay.csv", decay.str());

  std::ostringstream samples;
  {
    io::CsvWriter csv(samples, {"n1", "sample", "candidate", "rho", "estimator"});
    for (const auto& s : t.greedy.steps) {
      csv << s.iteration << s.sample << s.candidate + 1 << s.rho << s.indicator;
      csv.end_row();
    }
  }
  io::write_file_atomic(dir / "greedy_samples.csv", samples.str());

  std::ostringstream report;
  report << "J = " << problem->J() << "\nK = " << config.problem.K << "\nN0 = " << t.bundle.model.N0()
         << "\nN1 = " << t.bundle.model.N1() << "\nconverged = " << (t.greedy.converged ? "yes" : "no")
         << "\nstop_reason = " << t.greedy.stop_reason << "\nseconds_setup = " << seconds_setup
         << "\nseconds_init = " << t.seconds_init << "\nseconds_greedy = " << t.seconds_greedy
         << "\nseconds_total = " << seconds_since(start) << "\n";
  if (!t.init_full.warning.empty()) report << "warning = " << t.init_full.warning << "\n";
  io::write_file_atomic(dir / "offline_report.txt", report.str());
  log << report.str();
  return 0;
}

int cmd_online(const CommandOptions& options, std::ostream& log) {
  const RunConfig cli = resolve_config(options);
  const LoadedModel m = load(model_path(options, cli));
  const rbm::ReducedModel& model = m.bundle.model;
  // Query and view come from the command line / given config, the discretization from the model.
  RunConfig config = m.config;
  config.payoff = cli.payoff;
  config.rho = cli.rho;
  config.view = cli.view;
  const Query query = parse_query(config.payoff);
  const auto dir = output_dir(options, cli);

  const auto mesh = build_mesh(config.problem.mesh, m.knots);
  if (mesh.num_dofs() != model.J) throw ModelError("model dimensions do not match its configuration");

  const auto start = Clock::now();
  const rbm::ReducedSolution s = solve_query(model, m.knots, query, config.rho);
  const double seconds_online = seconds_since(start);
  const truth::ErrorBreakdown e = model.estimate(s, config.training.beta_lb);
  const bool trained = in_training_range(config, config.rho);

  std::vector<std::string> header{"rho", "R_N0", "R_N1", "beta_LB", "delta", "delta1", "in_training_range"};
  std::optional<double> err_full;
  std::optional<double> err_window;
  double seconds_truth = 0.0;
  if (options.truth) {
    const auto problem = build_problem(config.problem);
    check_matches(*problem, model);
    const auto t0 = Clock::now();
    const auto tr = problem->truth->solve(config.rho, truth_initial(*problem, model, query));
    seconds_truth = seconds_since(t0);
    auto diff = truth::nodal_states(tr, problem->truth->init_space());
    const auto red = rbm::reduced_states(*problem->truth, model, s);
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= red[k];
    err_full = problem->truth->xbar().norm(diff);
    err_window = WindowNorm(*problem, config.view).norm(diff);
    header.insert(header.end(), {"true_error", "true_error_window"});
  }

  prepare_dir(dir);
  std::ostringstream eb;
  {
    io::CsvWriter csv(eb, header);
    csv << config.rho << e.R_N0 << e.R_N1 << e.beta_LB << e.delta << e.delta1 << (trained ? 1 : 0);
    if (err_full) csv << *err_full << *err_window;
    csv.end_row();
  }
  io::write_file_atomic(dir / "error_breakdown.csv", eb.str());

  // Surfaces at t = 0 and t = T on the full mesh.
  const Eigen::Index J = model.J;
  const Vector u0 = model.initial_value(s);
  const Vector uT = model.N1() > 0 ? Vector(model.evolution(s).tail(J)) : Vector(Vector::Zero(J));
  io::write_file_atomic(dir / "surface_t0.csv", surface_csv(mesh, u0, config.view));
  io::write_file_atomic(dir / "surface_T.csv", surface_csv(mesh, uT, config.view));

  std::ostringstream report;
  report << "seconds_online = " << seconds_online << "\n";
  if (options.truth) report << "seconds_truth = " << seconds_truth << "\n";
  io::write_file_atomic(dir / "online_report.txt", report.str());

  if (!trained) {
    log << "WARNING: rho = " << config.rho << " lies outside the trained range [" << config.training.rho_min << ", "
        << config.training.rho_max << "]; the estimate Delta = " << e.delta << " is not backed by training\n";
  }
  log << "rho = " << config.rho << "  R_N0 = " << e.R_N0 << "  R_N1 = " << e.R_N1 << "  Delta = " << e.delta << "\n";
  return 0;
}

int cmd_sweep(const CommandOptions& options, std::ostream& log) {
  const RunConfig cli = resolve_config(options);
  const LoadedModel m = load(model_path(options, cli));
  const rbm::ReducedModel& model = m.bundle.model;
  RunConfig config = m.config;
  config.payoff = cli.payoff;
  config.sweep_rho_min = cli.sweep_rho_min;
  config.sweep_rho_max = cli.sweep_rho_max;
  config.sweep_count = cli.sweep_count;
  config.view = cli.view;
  const Query query = parse_query(config.payoff);
  const auto dir = output_dir(options, cli);

  std::unique_ptr<Problem> problem;
  std::optional<WindowNorm> window;
  Vector u0_truth;
  if (options.truth) {
    problem = build_problem(config.problem);
    check_matches(*problem, model);
    window.emplace(*problem, config.view);
    u0_truth = truth_initial(*problem, model, query);
  }

  std::vector<std::string> header{"rho", "R_N0", "R_N1", "delta", "delta1", "in_training_range"};
  if (options.truth) header.insert(header.end(), {"true_error", "true_error_window"});
  std::ostringstream os;
  io::CsvWriter csv(os, header);
  for (double rho : linspace(config.sweep_rho_min, config.sweep_rho_max, config.sweep_count)) {
    const rbm::ReducedSolution s = solve_query(model, m.knots, query, rho);
    const truth::ErrorBreakdown e = model.estimate(s, config.training.beta_lb);
    csv << rho << e.R_N0 << e.R_N1 << e.delta << e.delta1 << (in_training_range(config, rho) ? 1 : 0);
    if (problem) {
      const auto tr = problem->truth->solve(rho, u0_truth);
      auto diff = truth::nodal_states(tr, problem->truth->init_space());
      const auto red = rbm::reduced_states(*problem->truth, model, s);
      for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= red[k];
      csv << problem->truth->xbar().norm(diff) << window->norm(diff);
    }
    csv.end_row();
  }
  prepare_dir(dir);
  io::write_file_atomic(dir / "sweep.csv", os.str());
  log << "wrote " << config.sweep_count << " rows to " << (dir / "sweep.csv").string() << "\n";
  return 0;
}

std::vector<ScenarioResult> run_scenarios(const RunConfig& config, const Problem& problem) {
  if (problem.knots.L() < 7) throw ConfigError("scenarios need at least 7 knots");
  if (config.training.init != InitMethod::Pod) throw ConfigError("scenarios compare POD bases; set training.init = pod");
  const Query query = parse_query(config.payoff);
  const WindowNorm window(problem, config.view);
  std::vector<ScenarioResult> rows;
  for (auto [n0, n_train] : {std::pair{5, 5}, {5, 7}, {7, 5}, {7, 7}}) {
    RunConfig c = config;
    c.training.n0 = n0;
    c.training.n_init_train = n_train;
    const TrainedModel t = train(c, problem);
    const auto& model = t.bundle.model;
    const rbm::ReducedSolution s = solve_query(model, problem.knots, query, c.rho);
    const auto tr = problem.truth->solve(c.rho, truth_initial(problem, model, query));
    auto diff = truth::nodal_states(tr, problem.truth->init_space());
    const auto red = rbm::reduced_states(*problem.truth, model, s);
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= red[k];
    ScenarioResult r;
    r.n0 = n0;
    r.n_init_train = n_train;
    r.training_size = static_cast<std::size_t>(n_train) * static_cast<std::size_t>(c.training.rho_count);
    r.N1 = model.N1();
    r.error_window = window.norm(diff);
    r.error_full = problem.truth->xbar().norm(diff);
    r.delta = model.estimate(s, c.training.beta_lb).delta;
    r.seconds_greedy = t.seconds_greedy;
    r.stop_reason = t.greedy.stop_reason;
    rows.push_back(r);
  }
  return rows;
}

int cmd_scenarios(const CommandOptions& options, std::ostream& log) {
  const RunConfig config = resolve_config(options);
  parse_query(config.payoff);
  const auto dir = output_dir(options, config);
  const auto problem = build_problem(config.problem);
  const auto rows = run_scenarios(config, *problem);

  std::ostringstream os;
  std::ostringstream report;
  io::CsvWriter csv(os, {"scenario", "n0", "n_init_train", "training_size", "N1", "true_error_window",
                         "true_error", "delta"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv << i + 1 << r.n0 << r.n_init_train << r.training_size << r.N1 << r.error_window << r.error_full << r.delta;
    csv.end_row();
    report << "scenario " << i + 1 << ": seconds_greedy = " << r.seconds_greedy << ", stop_reason = " << r.stop_reason
           << "\n";
  }
  prepare_dir(dir);
  io::write_file_atomic(dir / "scenarios.csv", os.str());
  io::write_file_atomic(dir / "scenarios_report.txt", report.str());
  log << os.str();
  return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reduced basis pricing for the Heston model in space-time form"};
  app.require_subcommand(1);
  CommandOptions o;
  std::string config_path, model_path_s, out_dir, payoff_text;
  double rho = 0.0;
  unsigned long long seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file (INI)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed");
  };
  auto* validate = app.add_subcommand("validate-config", "check a configuration and print its canonical form");
  validate->add_option("--config", config_path, "configuration file (INI)");
  auto* offline = app.add_subcommand("offline", "train and persist a reduced model");
  add_common(offline);
  auto* online = app.add_subcommand("online", "evaluate a trained model at one parameter");
  auto* sweep = app.add_subcommand("sweep", "evaluate a trained model over a rho grid");
  for (auto* sub : {online, sweep}) {
    add_common(sub);
    sub->add_option("--model", model_path_s, "model file");
    sub->add_option("--payoff", payoff_text, "call:K, put:K, knots:c1,...,cL or basis:i");
    sub->add_flag("--truth", o.truth, "compare against the detailed solution");
  }
  online->add_option("--rho", rho, "correlation");
  auto* scenarios = app.add_subcommand("scenarios", "initial-value basis / training set comparison");
  add_common(scenarios);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  o.config = config_path;
  o.model = model_path_s;
  o.out = out_dir;
  if (!payoff_text.empty()) o.payoff = payoff_text;
  for (auto* sub : {offline, online, sweep, scenarios}) {
    if (*sub && sub->count("--seed") > 0) o.seed = seed;
  }
  if (online->count("--rho") > 0) o.rho = rho;

  try {
    if (*validate) return cmd_validate_config(o, out);
    if (*offline) return cmd_offline(o, err);
    if (*online) return cmd_online(o, err);
    if (*sweep) return cmd_sweep(o, err);
    if (*scenarios) return cmd_scenarios(o, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace strb::app
