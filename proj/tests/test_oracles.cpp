#include <catch2/catch_amalgamated.hpp>

#include "yano/oracles.hpp"

using namespace yano;

namespace {

// A smooth 1-form on S^2 that solves none of the defining equations.
AnalyticForm generic_sphere_form() {
  AnalyticForm f;
  f.n = 2;
  f.degree = 1;
  f.name = "generic";
  f.eval = [](const double* coord, double* comps, double* dcomps) {
    const double t = coord[0], p = coord[1];
    const auto y22 = real_ylm_jet(2, 2, t, p);
    const auto y31 = real_ylm_jet(3, -1, t, p);
    const double s = std::sin(t), c = std::cos(t);
    comps[0] = y22.val;
    comps[1] = y31.val;
    dcomps[0 * 2 + 0] = y22.dt;
    dcomps[0 * 2 + 1] = y31.dt;
    dcomps[1 * 2 + 0] = y22.dp / s;
    dcomps[1 * 2 + 1] = y31.dp / s;
    (void)c;
  };
  return f;
}

}  // namespace

TEST_CASE("torus parallel families") {
  SECTION("counts match C(n, r)") {
    CHECK(torus_parallel_basis(2, 1).size() == 2);
    CHECK(torus_parallel_basis(4, 2).size() == 6);
    CHECK(torus_parallel_basis(3, 2).size() == 3);
  }

  SECTION("every member solves all three equations on a torus grid") {
    const auto spec = ManifoldSpec::flat_torus(3, {2 * M_PI, 1.0, 3.0});
    const auto grid = build_grid(spec, 5);
    for (const auto& f : torus_parallel_basis(3, 2)) {
      CHECK(residual_ck(f, grid) < 1e-14);
      CHECK(residual_killing(f, grid) < 1e-14);
      CHECK(residual_closed_ck(f, grid) < 1e-14);
    }
  }
}

TEST_CASE("flat Killing families") {
  SECTION("counts match C(n+1, r+1)") {
    CHECK(flat_killing_basis(3, 1).size() == 6);
    CHECK(flat_killing_basis(2, 1).size() == 3);
    CHECK(flat_killing_basis(4, 2).size() == 10);
  }

  SECTION("every member passes the Killing residual on chart points") {
    const auto spec = ManifoldSpec::flat_torus(3, {2 * M_PI, 2 * M_PI, 2.0});
    const auto grid = build_grid(spec, 6);
    for (const auto& f : flat_killing_basis(3, 1))
      CHECK(residual_killing(f, grid) < 1e-12);
    for (const auto& f : flat_killing_basis(3, 2))
      CHECK(residual_killing(f, grid) < 1e-12);
  }
}

TEST_CASE("sphere conformal-Killing family") {
  const auto spec = ManifoldSpec::conformal_sphere();
  const auto grid = build_grid(spec, 16);
  const auto family = sphere_ck_basis();
  REQUIRE(family.size() == 6);

  SECTION("all six satisfy the conformal-Killing equation") {
    for (const auto& f : family) CHECK(residual_ck(f, grid) < 1e-10);
  }

  SECTION("rotation duals are Killing but not closed") {
    for (const auto& f : family) {
      if (f.provenance != Provenance::sphere_rotation) continue;
      CHECK(residual_killing(f, grid) < 1e-10);
      CHECK(residual_closed_ck(f, grid) > 0.1);
    }
  }

  SECTION("gradients are closed conformal-Killing but not Killing") {
    for (const auto& f : family) {
      if (f.provenance != Provenance::sphere_gradient) continue;
      CHECK(residual_closed_ck(f, grid) < 1e-10);
      CHECK(residual_killing(f, grid) > 0.1);
    }
  }

  SECTION("the family is linearly independent under the L2 product") {
    const auto basis = build_basis(spec, grid, 1, 4);
    Eigen::MatrixXd gram(6, 6);
    std::vector<FormField> proj;
    for (const auto& f : family)
      proj.push_back(project(grid, basis, sample_on_grid(f, grid).vals));
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        gram(i, j) = l2_inner(basis, proj[i], proj[j]) /
                     std::sqrt(l2_inner(basis, proj[i], proj[i]) *
                               l2_inner(basis, proj[j], proj[j]));
    CHECK(std::abs(gram.determinant()) > 1e-6);
  }

  SECTION("generic forms fail the conformal-Killing test") {
    CHECK(residual_ck(generic_sphere_form(), grid) > 0.1);
  }

  SECTION("zero fields are rejected") {
    AnalyticForm zero;
    zero.n = 2;
    zero.degree = 1;
    zero.eval = [](const double*, double* comps, double* dcomps) {
      comps[0] = comps[1] = 0.0;
      for (int q = 0; q < 4; ++q) dcomps[q] = 0.0;
    };
    CHECK_THROWS_AS(residual_ck(zero, grid), std::invalid_argument);
  }
}

TEST_CASE("conformal rescaling maps the family to the scaled metric") {
  const auto spec = ManifoldSpec::conformal_sphere({{1, 0, 0.2}});
  const auto grid = build_grid(spec, 20);
  const SphExpansion f{spec.conformal_coeffs};

  int killing_pass = 0;
  for (const auto& form : sphere_ck_basis()) {
    const auto scaled = conformal_scale(form, f, 2.0);  // weight r + 1
    CHECK(residual_ck(scaled, grid) < 1e-10);
    if (residual_killing(scaled, grid) < 1e-8) ++killing_pass;
  }
  // only the rotation about the symmetry axis stays Killing
  CHECK(killing_pass == 1);

  // the z-gradient stays closed (df is proportional to d cos t)
  const auto grad_z = conformal_scale(sphere_ck_basis()[5], f, 2.0);
  CHECK(residual_closed_ck(grad_z, grid) < 1e-10);
  const auto grad_x = conformal_scale(sphere_ck_basis()[3], f, 2.0);
  CHECK(residual_closed_ck(grad_x, grid) > 1e-3);

  // without the rescaling the round family fails under the scaled metric
  int unscaled_ck_pass = 0;
  for (const auto& form : sphere_ck_basis())
    if (residual_ck(form, grid) < 1e-8) ++unscaled_ck_pass;
  CHECK(unscaled_ck_pass == 0);
}

TEST_CASE("wedges of parallel forms stay parallel") {
  const auto spec = ManifoldSpec::flat_torus(4, {2 * M_PI, 1.0, 1.0, 2.0});
  const auto grid = build_grid(spec, 3);
  const auto ones = torus_parallel_basis(4, 1);
  const auto w = wedge_analytic(ones[0], ones[2]);
  CHECK(w.degree == 2);
  CHECK(residual_killing(w, grid) < 1e-14);
  CHECK(residual_closed_ck(w, grid) < 1e-14);
}

TEST_CASE("cross certification against spectral kernels") {
  SECTION("torus: parallel family spans the conformal-Killing kernel") {
    const auto spec = ManifoldSpec::flat_torus(3, {2 * M_PI, 2 * M_PI, 2 * M_PI});
    const auto grid = build_grid(spec, 5);
    const auto fine = build_grid(spec, 11);
    const auto basis = build_basis(spec, grid, 1, 2);
    const auto fine_basis = build_basis(spec, fine, 1, 2);
    const auto qf = assemble(spec, grid, basis);
    const auto family = torus_parallel_basis(3, 1);
    const auto rep = cross_certify(family, grid, basis, fine, fine_basis,
                                   qf.Q3, qf.M);
    REQUIRE(rep.entries.size() == 3);
    for (const auto& e : rep.entries) {
      CHECK(e.projection_defect < 1e-8);
      CHECK(e.rayleigh_rel < 1e-8);
    }
    CHECK(rep.span_dim == 3);

    const auto rep_qb = cross_certify(family, grid, basis, fine, fine_basis,
                                      qf.QB, qf.M);
    CHECK(rep_qb.span_dim == 3);  // equals c_1

    SECTION("x-linear chart forms are rejected by the projection defect") {
      const auto chart = flat_killing_basis(3, 1);
      const auto rep_chart = cross_certify(chart, grid, basis, fine,
                                           fine_basis, qf.Q3, qf.M);
      int rejected = 0;
      for (const auto& e : rep_chart.entries)
        if (e.projection_defect > 0.1) ++rejected;
      CHECK(rejected == 3);  // the three rotational members
      CHECK(rep_chart.span_dim == 3);  // only the constant members survive
    }
  }

  SECTION("sphere: the analytic family spans the 6-dimensional kernel") {
    const auto spec = ManifoldSpec::conformal_sphere();
    const auto grid = build_grid(spec, 24);
    const auto fine = build_grid(spec, 36);
    const auto basis = build_basis(spec, grid, 1, 8);
    const auto fine_basis = build_basis(spec, fine, 1, 8);
    const auto qf = assemble(spec, grid, basis);
    const auto rep = cross_certify(sphere_ck_basis(), grid, basis, fine,
                                   fine_basis, qf.Q3, qf.M);
    for (const auto& e : rep.entries) {
      CHECK(e.projection_defect < 1e-8);
      CHECK(e.rayleigh_rel < 1e-8);
    }
    CHECK(rep.span_dim == 6);
  }
}
