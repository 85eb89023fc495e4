#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "strb/io.hpp"

namespace strb::app {

namespace {

namespace pt = boost::property_tree;

// Shortest text that reads back to the same double; keeps configs readable.
std::string shortest(double x) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), x);
  return ec == std::errc{} ? std::string(buffer, end) : io::format_double(x);
}

double to_double(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': expected a number, got '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("'" + key + "': expected a number, got '" + s + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': expected an integer, got '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("'" + key + "': expected an integer, got '" + s + "'");
  return x;
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) s += ", ";
    s += shortest(xs[i]);
  }
  return s;
}

std::vector<double> split(const std::string& key, const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("'" + key + "': empty list entry");
    out.push_back(to_double(key, item.substr(b, e - b + 1)));
  }
  return out;
}

// One table drives parsing, serialization and the unknown-key check.
struct Field {
  std::string key;  // section.name
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename Ref>
Field real_field(const std::string& key, Ref ref) {
  return {key, [ref](const RunConfig& c) { RunConfig copy = c;
            return shortest(ref(copy)); },
          [ref, key](RunConfig& c, const std::string& v) { ref(c) = to_double(key, v); }};
}

template <typename Ref>
Field int_field(const std::string& key, Ref ref) {
  return {key, [ref](const RunConfig& c) { RunConfig copy = c;
            return std::to_string(ref(copy)); },
          [ref, key](RunConfig& c, const std::string& v) {
            using T = std::remove_reference_t<decltype(ref(c))>;
            if constexpr (std::is_unsigned_v<T>) {
              if (!v.empty() && v.front() == '-') throw ConfigError("'" + key + "': value out of range");
              std::size_t used = 0;
              unsigned long long x = 0;
              try {
                x = std::stoull(v, &used);
              } catch (const std::exception&) {
                throw ConfigError("'" + key + "': expected an integer, got '" + v + "'");
              }
              if (used != v.size()) throw ConfigError("'" + key + "': expected an integer, got '" + v + "'");
              ref(c) = static_cast<T>(x);
            } else {
              const long long x = to_integer(key, v);
              if (x < static_cast<long long>(std::numeric_limits<T>::min()) ||
                  x > static_cast<long long>(std::numeric_limits<T>::max())) {
                throw ConfigError("'" + key + "': value out of range");
              }
              ref(c) = static_cast<T>(x);
            }
          }};
}

template <typename Ref>
Field text_field(const std::string& key, Ref ref) {
  return {key, [ref](const RunConfig& c) { RunConfig copy = c;
            return ref(copy); },
          [ref](RunConfig& c, const std::string& v) { ref(c) = v; }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      real_field("mesh.s_min", [](RunConfig& c) -> double& { return c.problem.mesh.s_min; }),
      real_field("mesh.s_max", [](RunConfig& c) -> double& { return c.problem.mesh.s_max; }),
      real_field("mesh.nu_min", [](RunConfig& c) -> double& { return c.problem.mesh.nu_min; }),
      real_field("mesh.nu_max", [](RunConfig& c) -> double& { return c.problem.mesh.nu_max; }),
      int_field("mesh.nx", [](RunConfig& c) -> int& { return c.problem.mesh.nx; }),
      int_field("mesh.ny", [](RunConfig& c) -> int& { return c.problem.mesh.ny; }),
      {"mesh.grading", [](const RunConfig& c) { return std::string(c.problem.mesh.knot_aligned ? "knots" : "uniform"); },
       [](RunConfig& c, const std::string& v) {
         if (v != "knots" && v != "uniform") throw ConfigError("'mesh.grading': expected knots or uniform");
         c.problem.mesh.knot_aligned = v == "knots";
       }},
      real_field("mesh.grading_power", [](RunConfig& c) -> double& { return c.problem.mesh.grading_power; }),
      real_field("time.T", [](RunConfig& c) -> double& { return c.problem.T; }),
      int_field("time.K", [](RunConfig& c) -> int& { return c.problem.K; }),
      real_field("heston.kappa", [](RunConfig& c) -> double& { return c.problem.heston.kappa; }),
      real_field("heston.theta", [](RunConfig& c) -> double& { return c.problem.heston.theta; }),
      real_field("heston.sigma", [](RunConfig& c) -> double& { return c.problem.heston.sigma; }),
      real_field("heston.r", [](RunConfig& c) -> double& { return c.problem.heston.r; }),
      {"payoff.knots", [](const RunConfig& c) { return join(c.problem.knot_prices); },
       [](RunConfig& c, const std::string& v) { c.problem.knot_prices = split("payoff.knots", v); }},
      real_field("parameter.rho_min", [](RunConfig& c) -> double& { return c.rho_domain_min; }),
      real_field("parameter.rho_max", [](RunConfig& c) -> double& { return c.rho_domain_max; }),
      {"training.init", [](const RunConfig& c) { return std::string(c.training.init == InitMethod::Pod ? "pod" : "greedy"); },
       [](RunConfig& c, const std::string& v) {
         if (v != "pod" && v != "greedy") throw ConfigError("'training.init': expected pod or greedy");
         c.training.init = v == "pod" ? InitMethod::Pod : InitMethod::Greedy;
       }},
      int_field("training.n0", [](RunConfig& c) -> int& { return c.training.n0; }),
      int_field("training.n_init_train", [](RunConfig& c) -> int& { return c.training.n_init_train; }),
      real_field("training.tol0", [](RunConfig& c) -> double& { return c.training.tol0; }),
      real_field("training.rho_min", [](RunConfig& c) -> double& { return c.training.rho_min; }),
      real_field("training.rho_max", [](RunConfig& c) -> double& { return c.training.rho_max; }),
      int_field("training.rho_count", [](RunConfig& c) -> int& { return c.training.rho_count; }),
      real_field("training.tol1", [](RunConfig& c) -> double& { return c.training.tol1; }),
      int_field("training.n_max", [](RunConfig& c) -> int& { return c.training.n_max; }),
      real_field("training.beta_lb", [](RunConfig& c) -> double& { return c.training.beta_lb; }),
      text_field("online.payoff", [](RunConfig& c) -> std::string& { return c.payoff; }),
      real_field("online.rho", [](RunConfig& c) -> double& { return c.rho; }),
      real_field("sweep.rho_min", [](RunConfig& c) -> double& { return c.sweep_rho_min; }),
      real_field("sweep.rho_max", [](RunConfig& c) -> double& { return c.sweep_rho_max; }),
      int_field("sweep.count", [](RunConfig& c) -> int& { return c.sweep_count; }),
      real_field("view.s_min", [](RunConfig& c) -> double& { return c.view.s_min; }),
      real_field("view.s_max", [](RunConfig& c) -> double& { return c.view.s_max; }),
      real_field("view.nu_min", [](RunConfig& c) -> double& { return c.view.nu_min; }),
      real_field("view.nu_max", [](RunConfig& c) -> double& { return c.view.nu_max; }),
      text_field("output.dir", [](RunConfig& c) -> std::string& { return c.output_dir; }),
      int_field("run.seed", [](RunConfig& c) -> unsigned long long& { return c.seed; }),
  };
  return table;
}

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void RunConfig::validate() const {
  const auto& m = problem.mesh;
  check(finite(m.s_min) && finite(m.s_max) && m.s_min > 0.0 && m.s_max > m.s_min,
        "mesh: need 0 < s_min < s_max (degenerate domain)");
  check(finite(m.nu_min) && finite(m.nu_max) && m.nu_min > 0.0 && m.nu_max > m.nu_min,
        "mesh: need 0 < nu_min < nu_max (degenerate domain)");
  check(m.nx >= 2 && m.ny >= 2, "mesh: nx and ny must be at least 2");
  check(finite(m.grading_power) && m.grading_power >= 0.0, "mesh: grading_power must be non-negative");
  check(finite(problem.T) && problem.T > 0.0, "time: T must be positive");
  check(problem.K >= 1, "time: K must be at least 1");
  const auto& h = problem.heston;
  check(finite(h.kappa) && h.kappa > 0.0, "heston: kappa must be positive");
  check(finite(h.theta) && h.theta > 0.0, "heston: theta must be positive");
  check(finite(h.sigma) && h.sigma >= 0.0, "heston: sigma must be non-negative");
  check(finite(h.r), "heston: r must be finite");
  const auto& k = problem.knot_prices;
  check(k.size() >= 2, "payoff: need at least two knots");
  for (std::size_t i = 0; i < k.size(); ++i) {
    check(finite(k[i]) && k[i] > 0.0, "payoff: knots must be positive prices");
    if (i > 0) check(k[i] > k[i - 1], "payoff: knots must be strictly increasing");
  }
  const double rel = 1e-12;
  check(k.front() >= m.s_min * (1 - rel) && k.back() <= m.s_max * (1 + rel), "payoff: knots must lie in [s_min, s_max]");
  check(finite(rho_domain_min) && finite(rho_domain_max) && rho_domain_min < rho_domain_max,
        "parameter: need rho_min < rho_max");
  check(rho_domain_min >= -1.0 && rho_domain_max <= 1.0, "parameter: correlation must stay in [-1, 1]");
  const auto& t = training;
  const int L = static_cast<int>(k.size());
  check(t.n0 >= 1 && t.n0 <= L, "training: n0 must be between 1 and the knot count");
  check(t.n_init_train >= 1 && t.n_init_train <= L, "training: n_init_train must be between 1 and the knot count");
  check(t.init == InitMethod::Pod || t.n_init_train <= t.n0,
        "training: with init = greedy, n_init_train cannot exceed n0");
  check(finite(t.tol0) && t.tol0 >= 0.0, "training: tol0 must be non-negative");
  check(finite(t.rho_min) && finite(t.rho_max) && t.rho_min <= t.rho_max, "training: need rho_min <= rho_max");
  check(t.rho_min >= rho_domain_min && t.rho_max <= rho_domain_max, "training: rho range outside the parameter domain");
  check(t.rho_count >= 1, "training: rho_count must be positive");
  check(t.rho_count > 1 || t.rho_min == t.rho_max, "training: a single rho needs rho_min == rho_max");
  check(!std::isnan(t.tol1) && t.tol1 >= 0.0, "training: tol1 must be non-negative (inf allowed)");
  check(t.n_max >= 1, "training: n_max must be positive");
  check(finite(t.beta_lb) && t.beta_lb > 0.0, "training: beta_lb must be positive");
  try {
    payoff::parse_payoff(payoff);
  } catch (const std::exception& e) {
    if (payoff.rfind("basis:", 0) != 0) throw ConfigError(std::string("online: ") + e.what());
  }
  check(finite(rho), "online: rho must be finite");
  check(finite(sweep_rho_min) && finite(sweep_rho_max) && sweep_rho_min <= sweep_rho_max,
        "sweep: need rho_min <= rho_max");
  check(sweep_count >= 1, "sweep: count must be positive");
  check(view.s_min > 0.0 && view.s_max > view.s_min && view.nu_max > view.nu_min, "view: degenerate window");
  check(!output_dir.empty(), "output: dir must not be empty");
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.what());
  }
  std::map<std::string, const Field*> by_key;
  for (const auto& f : fields()) by_key[f.key] = &f;

  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside of a section");
    for (const auto& [name, value] : body) {
      const std::string key = section + "." + name;
      auto it = by_key.find(key);
      if (it == by_key.end()) throw ConfigError("unknown config key '" + key + "'");
      it->second->set(c, value.data());
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string s = f.key.substr(0, dot);
    if (s != section) {
      if (!section.empty()) out += "\n";
      out += "[" + s + "]\n";
      section = s;
    }
    out += f.key.substr(dot + 1) + " = " + f.get(config) + "\n";
  }
  return out;
}

}  // namespace strb::app
