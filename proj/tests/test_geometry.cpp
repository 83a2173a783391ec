#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "yano/grid.hpp"

using namespace yano;

namespace {

// Independent high-order 1-D quadrature (composite Simpson) for the area of
// an axisymmetric conformal sphere: area = 2 pi int_0^pi e^{2 f(t)} sin t dt.
double simpson_axisym_area(const SphExpansion& f, int panels) {
  auto integrand = [&](double t) {
    if (t <= 0.0 || t >= M_PI) return 0.0;  // sin factor kills the endpoints
    return std::exp(2.0 * f.jet(t, 0.3).val) * std::sin(t);
  };
  const double h = M_PI / panels;
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = i * h;
    acc += h / 6.0 *
           (integrand(a) + 4.0 * integrand(a + 0.5 * h) + integrand(a + h));
  }
  return 2.0 * M_PI * acc;
}

// Coordinate metric of the (conformal) sphere in (theta, phi).
void metric_at(const ManifoldSpec& spec, double t, double p, double& g11,
               double& g22) {
  const SphExpansion f{spec.conformal_coeffs};
  const double e2f = std::exp(2.0 * f.jet(t, p).val);
  g11 = e2f;
  g22 = e2f * std::sin(t) * std::sin(t);
}

// Frame connection coefficients from centered finite differences of the
// metric alone: coordinate Christoffels, then conjugation by the diagonal
// frame E = diag(g11^{-1/2}, g22^{-1/2}).
std::vector<double> fd_connection(const ManifoldSpec& spec, double t, double p) {
  const double h = 1e-5;
  auto g = [&](int i, int j, double tt, double pp) {
    double g11, g22;
    metric_at(spec, tt, pp, g11, g22);
    if (i != j) return 0.0;
    return i == 0 ? g11 : g22;
  };
  auto dg = [&](int k, int i, int j, double tt, double pp) {
    const double dt = k == 0 ? h : 0.0, dp = k == 1 ? h : 0.0;
    return (g(i, j, tt + dt, pp + dp) - g(i, j, tt - dt, pp - dp)) / (2 * h);
  };
  // coordinate Christoffels (diagonal metric)
  double christoffel[2][2][2];
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double ginv = 1.0 / g(k, k, t, p);
        christoffel[k][i][j] =
            0.5 * ginv *
            (dg(i, j, k, t, p) + dg(j, i, k, t, p) - dg(k, i, j, t, p));
      }
  auto E = [&](int a, double tt, double pp) {
    return 1.0 / std::sqrt(g(a, a, tt, pp));
  };
  auto dE = [&](int i, int a, double tt, double pp) {
    const double dt = i == 0 ? h : 0.0, dp = i == 1 ? h : 0.0;
    return (E(a, tt + dt, pp + dp) - E(a, tt - dt, pp - dp)) / (2 * h);
  };
  // Gamma^c_{ab} = e^c_k (E_a^i d_i E_b^k + E_a^i E_b^j Gamma^k_{ij})
  std::vector<double> out(8, 0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        double v = E(a, t, p) * (c == b ? dE(a, b, t, p) : 0.0);
        v += E(a, t, p) * E(b, t, p) * christoffel[c][a][b];
        out[(a * 2 + b) * 2 + c] = v / E(c, t, p);
      }
  return out;
}

// Gaussian curvature of a diagonal metric by nested finite differences
// (Brioschi formula for ds^2 = E dt^2 + G dp^2).
double fd_curvature(const ManifoldSpec& spec, double t, double p) {
  const double h = 1e-3;
  auto EG = [&](double tt, double pp, double& Ee, double& Gg) {
    metric_at(spec, tt, pp, Ee, Gg);
  };
  auto term_t = [&](double tt, double pp) {
    double E0, G0, Ep, Gp, Em, Gm;
    EG(tt, pp, E0, G0);
    EG(tt + h, pp, Ep, Gp);
    EG(tt - h, pp, Em, Gm);
    const double Gt = (Gp - Gm) / (2 * h);
    return Gt / std::sqrt(E0 * G0);
  };
  auto term_p = [&](double tt, double pp) {
    double E0, G0, Ep, Gp, Em, Gm;
    EG(tt, pp, E0, G0);
    EG(tt, pp + h, Ep, Gp);
    EG(tt, pp - h, Em, Gm);
    const double Epd = (Ep - Em) / (2 * h);
    return Epd / std::sqrt(E0 * G0);
  };
  double E0, G0;
  EG(t, p, E0, G0);
  const double dt_term = (term_t(t + h, p) - term_t(t - h, p)) / (2 * h);
  const double dp_term = (term_p(t, p + h) - term_p(t, p - h)) / (2 * h);
  return -(dt_term + dp_term) / (2.0 * std::sqrt(E0 * G0));
}

}  // namespace

TEST_CASE("torus grid: nodes, weights and flat volume") {
  const auto spec = ManifoldSpec::flat_torus(2, {2 * M_PI, 2 * M_PI});
  const auto grid = build_grid(spec, 8);
  REQUIRE(grid.node_count() == 64);
  const double vol = grid.weights.sum();
  CHECK(vol == Catch::Approx(39.478417604357434).epsilon(1e-10));
  CHECK(grid.weights.minCoeff() > 0.0);
  CHECK(grid.gamma.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grid.curvature.cwiseAbs().maxCoeff() == 0.0);

  const auto spec3 = ManifoldSpec::flat_torus(3, {1.0, 2.0, 3.0});
  const auto grid3 = build_grid(spec3, 5);
  CHECK(grid3.weights.sum() == Catch::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("round sphere grid: area and interior nodes") {
  const auto spec = ManifoldSpec::conformal_sphere();
  const auto grid = build_grid(spec, 12);
  CHECK(grid.weights.sum() == Catch::Approx(12.566370614359172).epsilon(1e-10));
  for (int i = 0; i < grid.node_count(); ++i) {
    CHECK(grid.nodes(i, 0) > 0.0);
    CHECK(grid.nodes(i, 0) < M_PI);
    CHECK(grid.weights(i) > 0.0);
  }
}

TEST_CASE("conformal sphere area matches an independent 1-D quadrature") {
  const auto spec = ManifoldSpec::conformal_sphere({{1, 0, 0.2}});
  const auto grid = build_grid(spec, 16);
  const SphExpansion f{spec.conformal_coeffs};
  const double oracle = simpson_axisym_area(f, 4000);
  CHECK(oracle == Catch::Approx(12.646523542133051).epsilon(1e-9));
  CHECK(grid.weights.sum() == Catch::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("connection coefficients match the finite-difference oracle") {
  const Eigen::Vector2d node(1.1, 0.7);

  SECTION("flat torus: identically zero") {
    const auto spec = ManifoldSpec::flat_torus(3, {2 * M_PI, 2 * M_PI, 2 * M_PI});
    Eigen::VectorXd tn(3);
    tn << 0.3, 1.0, 2.0;
    for (double v : connection_at(spec, tn)) CHECK(v == 0.0);
  }

  SECTION("round sphere") {
    const auto spec = ManifoldSpec::conformal_sphere();
    const auto got = connection_at(spec, node);
    const auto want = fd_connection(spec, node(0), node(1));
    for (int q = 0; q < 8; ++q)
      CHECK(got[q] == Catch::Approx(want[q]).margin(1e-6));
  }

  SECTION("conformal sphere") {
    const auto spec = ManifoldSpec::conformal_sphere({{1, 0, 0.2}, {2, 1, 0.1}});
    const auto got = connection_at(spec, node);
    const auto want = fd_connection(spec, node(0), node(1));
    for (int q = 0; q < 8; ++q)
      CHECK(got[q] == Catch::Approx(want[q]).margin(1e-6));
  }

  SECTION("metric compatibility: antisymmetry in the last two slots") {
    const auto spec = ManifoldSpec::conformal_sphere({{1, 0, 0.2}, {3, -2, 0.05}});
    const auto g = connection_at(spec, node);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          CHECK(g[(a * 2 + b) * 2 + c] ==
                Catch::Approx(-g[(a * 2 + c) * 2 + b]).margin(1e-14));
  }

  SECTION("pole rejection") {
    const auto spec = ManifoldSpec::conformal_sphere();
    Eigen::Vector2d pole(0.0, 0.0);
    CHECK_THROWS_AS(connection_at(spec, pole), std::invalid_argument);
  }
}

TEST_CASE("curvature: flat, round, and conformal against finite differences") {
  const auto torus = ManifoldSpec::flat_torus(2, {1.0, 1.0});
  Eigen::Vector2d tn(0.25, 0.5);
  CHECK(curvature_at(torus, tn) == 0.0);

  const auto round = ManifoldSpec::conformal_sphere();
  const auto grid = build_grid(round, 10);
  for (int i = 0; i < grid.node_count(); ++i)
    CHECK(grid.curvature(i) == Catch::Approx(1.0).margin(1e-12));

  const auto conf = ManifoldSpec::conformal_sphere({{1, 0, 0.2}});
  const Eigen::Vector2d node(1.3, 2.1);
  const double want = fd_curvature(conf, node(0), node(1));
  CHECK(curvature_at(conf, node) == Catch::Approx(want).margin(1e-5));

  const auto conf2 = ManifoldSpec::conformal_sphere({{2, -1, 0.15}});
  const double want2 = fd_curvature(conf2, node(0), node(1));
  CHECK(curvature_at(conf2, node) == Catch::Approx(want2).margin(1e-5));
}

TEST_CASE("grid construction rejects bad inputs") {
  CHECK_THROWS_AS(build_grid(ManifoldSpec::flat_torus(2, {1.0, 1.0}), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(ManifoldSpec::flat_torus(5, {1, 1, 1, 1, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ManifoldSpec::flat_torus(2, {1.0, -1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ManifoldSpec::conformal_sphere({{1, 2, 0.3}}),
                  std::invalid_argument);
}
