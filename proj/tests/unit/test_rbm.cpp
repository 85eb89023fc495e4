#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "strb/error.hpp"
#include "strb/model_io.hpp"
#include "strb/rbm.hpp"

using namespace strb;

namespace {

struct Fixture {
  std::unique_ptr<Problem> p = build_problem(test::small_config(12, 6, 8));
  std::vector<Vector> hats;
  Fixture() {
    for (int l = 0; l < p->knots.L(); ++l) hats.push_back(p->project(Vector::Unit(p->knots.L(), l)));
  }
  const SparseMatrix& M() const { return p->truth->init_space().gram; }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

double h_norm(const SparseMatrix& M, const Vector& v) { return std::sqrt(v.dot(M * v)); }

}  // namespace

TEST_CASE("POD basis is orthonormal and its error formula is the projection error") {
  auto& f = fixture();
  const auto pod = rbm::pod_init(f.hats, f.M(), 7);
  REQUIRE(pod.N0() == 7);
  CHECK((pod.basis.transpose() * (f.M() * pod.basis) - Matrix::Identity(7, 7)).norm() < 1e-10);
  for (Eigen::Index i = 1; i < pod.eigenvalues.size(); ++i) CHECK(pod.eigenvalues[i] <= pod.eigenvalues[i - 1]);
  for (int n : {1, 3, 5}) {
    double tail = 0.0, total = 0.0;
    const Matrix H = pod.basis.leftCols(n);
    for (const auto& c : f.hats) {
      const Vector proj = H * (H.transpose() * (f.M() * c));
      tail += std::pow(h_norm(f.M(), c - proj), 2);
      total += std::pow(h_norm(f.M(), c), 2);
    }
    CHECK(rbm::pod_relative_error(pod.eigenvalues, n) == doctest::Approx(std::sqrt(tail / total)).epsilon(1e-8));
  }
  CHECK(rbm::pod_relative_error(pod.eigenvalues, 7) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("initial-value greedy") {
  auto& f = fixture();
  const auto g = rbm::init_greedy(f.hats, f.M(), 0.0, 7);
  REQUIRE(g.N0() == 7);
  int first = 0;
  for (int i = 1; i < 7; ++i) {
    if (h_norm(f.M(), f.hats[static_cast<std::size_t>(i)]) > h_norm(f.M(), f.hats[static_cast<std::size_t>(first)])) first = i;
  }
  CHECK(g.selected.front() == first);
  for (std::size_t i = 1; i < g.max_errors.size(); ++i) CHECK(g.max_errors[i] <= g.max_errors[i - 1] + 1e-12);
  for (const auto& c : f.hats) CHECK(rbm::rb_init_project(c, g, f.M()).R_N0 < 1e-8 * h_norm(f.M(), c));
  const auto stop = rbm::init_greedy(f.hats, f.M(), 1e10, 7);
  CHECK(stop.N0() == 1);
}

TEST_CASE("Bernstein frame projection agrees with the H^M projection") {
  auto& f = fixture();
  const auto pod = rbm::pod_init(f.hats, f.M(), 7).truncated(4);
  const auto frame = rbm::make_bernstein_frame(f.p->bernstein, f.p->N_LM, pod.basis);
  const Vector c = Vector::LinSpaced(f.p->knots.L(), 0.0, 3.0);
  const auto a = rbm::rb_init_project(frame, c);
  const auto b = rbm::rb_init_project(f.p->project(c), pod, f.M());
  CHECK(test::rel_diff(a.alpha, b.alpha) < 1e-10);
  // R_N0^2 = ||mu0 - P mu0||^2 + ||P mu0 - h_N||^2 (Pythagoras in H).
  const double to_space2 = c.dot(f.p->bernstein * c) - f.p->project(c).dot(f.M() * f.p->project(c));
  CHECK(a.R_N0 == doctest::Approx(std::sqrt(to_space2 + b.R_N0 * b.R_N0)).epsilon(1e-6));
}

TEST_CASE("evolution trainer: supremizers, residuals and reproduction") {
  auto& f = fixture();
  const auto& s = *f.p->truth;
  const auto pod = rbm::pod_init(f.hats, f.M(), 7).truncated(3);
  rbm::EvolutionTrainer trainer(s, pod);
  const std::vector<double> rhos{-0.4, 0.1, 0.45};
  for (int n = 0; n < 3; ++n) {
    REQUIRE(trainer.add_snapshot(trainer.snapshot(pod.basis.col(n), rhos[static_cast<std::size_t>(n)])));
  }
  const auto& model = trainer.model();
  CHECK(model.N1() == 3);
  CHECK((s.xbar().apply_evolution(model.evolution_basis.col(1)).dot(model.evolution_basis.col(1)) - 1.0) < 1e-10);

  SUBCASE("supremizer normal equations") {
    const Vector sup = trainer.supremizer(1, 0.2);
    CHECK(test::rel_diff(s.z_gramian().apply(sup), s.op().apply(0.2, model.evolution_basis.col(1))) < 1e-10);
  }
  SUBCASE("online residual equals the full residual dual norm") {
    std::mt19937 rng(9);
    for (double rho : {-0.3, 0.05, 0.5, 0.9}) {
      const Vector alpha = test::random_vector(3, rng);
      const auto red = model.solve(alpha, rho);
      const Vector u0 = model.initial_value(red);
      const Vector r = s.modified_rhs(rho, u0) - s.op().apply(rho, model.evolution(red));
      CHECK(red.R_N1 == doctest::Approx(s.dual_norm_Z(r)).epsilon(1e-9));
    }
  }
  SUBCASE("trained samples are reproduced") {
    for (int n = 0; n < 3; ++n) {
      const double rho = rhos[static_cast<std::size_t>(n)];
      const auto red = model.solve(Vector::Unit(3, n), rho);
      const auto tr = s.solve(rho, pod.basis.col(n));
      CHECK(rbm::true_error(s, model, red, tr) <= 1e-8 * s.xbar_norm(tr));
      CHECK(red.R_N1 < 1e-8);
    }
  }
  SUBCASE("dependent snapshots are refused") {
    CHECK_FALSE(trainer.add_snapshot(model.evolution_basis.col(0) * 2.0));
    CHECK(trainer.model().N1() == 3);
  }
}

TEST_CASE("greedy converges on the small problem and model round-trips") {
  auto& f = fixture();
  const auto& s = *f.p->truth;
  const auto pod = rbm::pod_init(f.hats, f.M(), 7).truncated(4);
  rbm::EvolutionTrainer trainer(s, pod);
  std::vector<Vector> cands;
  for (int i = 0; i < 4; ++i) cands.emplace_back(pod.basis.col(i));
  rbm::GreedyOptions opt;
  opt.tol = 1e-2;
  const auto res = rbm::evolution_greedy(trainer, rbm::product_training_set(cands, {-0.5, 0.0, 0.5}), opt);
  CHECK(res.converged);
  CHECK(res.max_indicator.back() < opt.tol);
  CHECK(res.steps.size() == static_cast<std::size_t>(trainer.model().N1()));

  rbm::ModelBundle bundle;
  bundle.model = trainer.model();
  bundle.model.bernstein = rbm::make_bernstein_frame(f.p->bernstein, f.p->N_LM, pod.basis);
  bundle.config_text = "[time]\nK = 8\n";
  bundle.knots = f.p->knots.v;
  bundle.init_eigenvalues = Vector::LinSpaced(3, 3.0, 1.0);
  const auto dir = std::filesystem::temp_directory_path() / "strb_unit_model";
  std::filesystem::create_directories(dir);
  const auto path = dir / "m.strb";
  rbm::save_model(path, bundle);
  const auto back = rbm::load_model(path);
  CHECK(back.config_text == bundle.config_text);
  CHECK(back.knots == bundle.knots);
  CHECK((back.model.riesz - bundle.model.riesz).norm() == 0.0);
  CHECK((back.model.evolution_basis - bundle.model.evolution_basis).norm() == 0.0);
  CHECK(back.model.b_thetas == bundle.model.b_thetas);
  const auto r1 = bundle.model.solve(Vector::Ones(4), 0.3);
  const auto r2 = back.model.solve(Vector::Ones(4), 0.3);
  CHECK(r1.R_N1 == r2.R_N1);

  SUBCASE("corrupted files raise ModelError") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    auto write = [&](const std::string& text) {
      std::ofstream out(dir / "bad.strb", std::ios::binary);
      out << text;
    };
    write(bytes.substr(0, bytes.size() - 16));
    CHECK_THROWS_AS(rbm::load_model(dir / "bad.strb"), ModelError);
    std::string v2 = bytes;
    const auto pos = v2.find("\"format_version\":1");
    REQUIRE(pos != std::string::npos);
    v2.replace(pos, 18, "\"format_version\":2");
    write(v2);
    CHECK_THROWS_AS(rbm::load_model(dir / "bad.strb"), ModelError);
    write("STRB-MODEL\n{not json\n");
    CHECK_THROWS_AS(rbm::load_model(dir / "bad.strb"), ModelError);
    CHECK_THROWS_AS(rbm::load_model(dir / "missing.strb"), ModelError);
  }
}

TEST_CASE("inf-sup lower bound for the heat equation") {
  fem2d::StabilityConstants c;
  const auto b = rbm::infsup_lower_bound(c, 1.0);
  CHECK(b.coercive_valid);
  CHECK(b.combined == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  c.garding_lambda = 10.0;
  const auto g = rbm::infsup_lower_bound(c, 1.0);
  CHECK_FALSE(g.coercive_valid);
  CHECK(g.combined > 0.0);
  CHECK(g.combined < b.combined);
}
