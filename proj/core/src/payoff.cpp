#include "strb/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "strb/error.hpp"
#include "strb/io.hpp"

namespace strb::payoff {

BezierKnots::BezierKnots(std::vector<double> knots) : v(std::move(knots)) {
  require(!v.empty(), "need at least one knot");
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(std::isfinite(v[i]), "knots must be finite");
    if (i > 0) require(v[i] > v[i - 1], "knots must be strictly increasing");
  }
}

BezierKnots BezierKnots::from_prices(const std::vector<double>& prices) {
  std::vector<double> logs;
  for (double s : prices) {
    require(s > 0.0, "knot prices must be positive (use a small positive value instead of 0)");
    logs.push_back(std::log(s));
  }
  return BezierKnots(std::move(logs));
}

double bernstein_hat_eval(const BezierKnots& knots, int ell, double y) {
  const int L = knots.L();
  require(ell >= 1 && ell <= L, "Bernstein hat index out of range");
  if (L == 1) return 1.0;
  const auto& v = knots.v;
  const std::size_t i = static_cast<std::size_t>(ell - 1);
  if (ell > 1 && y >= v[i - 1] && y <= v[i]) return (y - v[i - 1]) / (v[i] - v[i - 1]);
  if (ell < L && y >= v[i] && y <= v[i + 1]) return (y - v[i + 1]) / (v[i] - v[i + 1]);
  return 0.0;
}

PayoffSpec parse_payoff(const std::string& text) {
  const auto colon = text.find(':');
  require(colon != std::string::npos, "payoff must look like call:K, put:K or knots:c1,c2,...");
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  auto number = [](const std::string& s) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == s.size() && !s.empty() && std::isfinite(x), "invalid number in payoff: '" + s + "'");
    return x;
  };
  if (kind == "call" || kind == "put") {
    const double strike = number(rest);
    require(strike >= 0.0, "strike must be non-negative");
    return kind == "call" ? PayoffSpec::call(strike) : PayoffSpec::put(strike);
  }
  if (kind == "knots") {
    std::vector<double> values;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(number(item));
    require(!values.empty(), "knot payoff needs values");
    return PayoffSpec::custom(std::move(values));
  }
  throw InvalidArgument("unknown payoff kind '" + kind + "'");
}

std::string to_string(const PayoffSpec& spec) {
  switch (spec.kind) {
    case PayoffSpec::Kind::Call: return "call:" + io::format_double(spec.strike);
    case PayoffSpec::Kind::Put: return "put:" + io::format_double(spec.strike);
    case PayoffSpec::Kind::Custom: break;
  }
  std::string s = "knots:";
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    if (i > 0) s += ',';
    s += io::format_double(spec.values[i]);
  }
  return s;
}

InitCoeffs payoff_coeffs(const PayoffSpec& spec, const BezierKnots& knots) {
  InitCoeffs c;
  c.mu0_L.resize(knots.L());
  for (int l = 0; l < knots.L(); ++l) {
    const double s = std::exp(knots.v[static_cast<std::size_t>(l)]);
    switch (spec.kind) {
      case PayoffSpec::Kind::Call: c.mu0_L[l] = std::max(s - spec.strike, 0.0); break;
      case PayoffSpec::Kind::Put: c.mu0_L[l] = std::max(spec.strike - s, 0.0); break;
      case PayoffSpec::Kind::Custom:
        require(static_cast<int>(spec.values.size()) == knots.L(), "custom payoff needs one value per knot");
        c.mu0_L[l] = spec.values[static_cast<std::size_t>(l)];
        break;
    }
  }
  return c;
}

namespace {

using Polygon = std::vector<fem2d::Point2>;

// Keeps the part of `poly` with sign * (y - line) >= 0.
Polygon clip(const Polygon& poly, double line, double sign) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    const double da = sign * (a.y - line);
    const double db = sign * (b.y - line);
    if (da >= 0.0) out.push_back(a);
    if ((da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0)) {
      const double s = da / (da - db);
      out.push_back({line, a.nu + s * (b.nu - a.nu)});
    }
  }
  return out;
}

double area(const fem2d::Point2& a, const fem2d::Point2& b, const fem2d::Point2& c) {
  return 0.5 * ((b.y - a.y) * (c.nu - a.nu) - (c.y - a.y) * (b.nu - a.nu));
}

}  // namespace

Matrix assemble_N_LM(const BezierKnots& knots, const fem2d::SpatialMesh& mesh, const timegrid::InitSpace& init) {
  const int L = knots.L();
  require(L >= 1, "no knots");
  require(init.embedding.rows() == mesh.num_dofs(), "initial-value space does not match the mesh");
  const auto dom = mesh.domain();
  const double slack = 1e-12 * std::max(1.0, dom.width());
  require(knots.v.front() >= dom.y_min - slack && knots.v.back() <= dom.y_max + slack,
          "knots must lie inside the mesh domain");

  Matrix nj = Matrix::Zero(L, mesh.num_dofs());
  if (L == 1) {
    nj.row(0) = fem2d::integrate_basis(mesh).transpose();
    return nj * init.embedding;
  }

  for (int t = 0; t < static_cast<int>(mesh.triangles().size()); ++t) {
    const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
    Polygon corners;
    for (int vtx : tri) corners.push_back(mesh.vertices()[static_cast<std::size_t>(vtx)]);
    const double full = area(corners[0], corners[1], corners[2]);
    auto lambda = [&](int a, const fem2d::Point2& x) {
      const auto& p = corners[static_cast<std::size_t>((a + 1) % 3)];
      const auto& q = corners[static_cast<std::size_t>((a + 2) % 3)];
      return area(x, p, q) / full;
    };
    const double ylo = std::min({corners[0].y, corners[1].y, corners[2].y});
    const double yhi = std::max({corners[0].y, corners[1].y, corners[2].y});

    for (int i = 0; i + 1 < L; ++i) {
      const double a = knots.v[static_cast<std::size_t>(i)];
      const double b = knots.v[static_cast<std::size_t>(i + 1)];
      if (b <= ylo || a >= yhi) continue;
      const Polygon piece = clip(clip(corners, a, 1.0), b, -1.0);
      if (piece.size() < 3) continue;
      for (std::size_t f = 1; f + 1 < piece.size(); ++f) {
        const std::array<fem2d::Point2, 3> sub{piece[0], piece[f], piece[f + 1]};
        const double w = std::abs(area(sub[0], sub[1], sub[2])) / 3.0;
        if (w == 0.0) continue;
        for (int e = 0; e < 3; ++e) {
          const auto& p = sub[static_cast<std::size_t>(e)];
          const auto& q = sub[static_cast<std::size_t>((e + 1) % 3)];
          const fem2d::Point2 mid{0.5 * (p.y + q.y), 0.5 * (p.nu + q.nu)};
          for (int ell : {i + 1, i + 2}) {
            const double bval = bernstein_hat_eval(knots, ell, mid.y);
            if (bval == 0.0) continue;
            for (int corner = 0; corner < 3; ++corner) {
              const int dof = mesh.dof_of(tri[static_cast<std::size_t>(corner)]);
              if (dof == fem2d::SpatialMesh::kBoundary) continue;
              nj(ell - 1, dof) += w * bval * lambda(corner, mid);
            }
          }
        }
      }
    }
  }
  return nj * init.embedding;
}

Matrix bernstein_gramian(const BezierKnots& knots, const fem2d::Rectangle& domain) {
  const int L = knots.L();
  Matrix g = Matrix::Zero(L, L);
  if (L == 1) {
    g(0, 0) = domain.area();
    return g;
  }
  for (int i = 0; i + 1 < L; ++i) {
    const double h = knots.v[static_cast<std::size_t>(i + 1)] - knots.v[static_cast<std::size_t>(i)];
    g(i, i) += h / 3.0;
    g(i + 1, i + 1) += h / 3.0;
    g(i, i + 1) += h / 6.0;
    g(i + 1, i) += h / 6.0;
  }
  return domain.height() * g;
}

double bernstein_basis(int n, int i, double t) {
  require(n >= 0 && i >= 0 && i <= n, "Bernstein index out of range");
  double binom = 1.0;
  for (int k = 1; k <= i; ++k) binom = binom * (n - i + k) / k;
  return binom * std::pow(t, i) * std::pow(1.0 - t, n - i);
}

double bezier_eval(const std::vector<double>& control, double t) {
  require(!control.empty(), "Bezier curve needs control values");
  std::vector<double> c = control;
  for (std::size_t level = c.size() - 1; level > 0; --level) {
    for (std::size_t i = 0; i < level; ++i) c[i] = (1.0 - t) * c[i] + t * c[i + 1];
  }
  return c.front();
}

}  // namespace strb::payoff
