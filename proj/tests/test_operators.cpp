#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "yano/operators.hpp"

using namespace yano;

namespace {

struct Setup {
  ManifoldSpec spec;
  QuadratureGrid grid;
  FormBasis basis;
  QuadraticForms qf;
};

Setup make(const ManifoldSpec& spec, int r, int cutoff, int resolution) {
  Setup s{spec, build_grid(spec, resolution), {}, {}};
  s.basis = build_basis(spec, s.grid, r, cutoff);
  s.qf = assemble(spec, s.grid, s.basis);
  return s;
}

int constant_form_index(const FormBasis& basis, int comp) {
  for (int i = 0; i < basis.size(); ++i) {
    const auto& lab = basis.labels[i];
    if (lab.freq == std::array<int, 4>{0, 0, 0, 0} && lab.phase == 0 &&
        lab.comp == comp)
      return i;
  }
  return -1;
}

}  // namespace

TEST_CASE("assembly: symmetry, decomposition identity, harmonic rows") {
  const auto s = make(ManifoldSpec::flat_torus(2, {2 * M_PI, 2 * M_PI}), 1, 2, 8);

  for (const auto* Q : {&s.qf.M, &s.qf.Qd, &s.qf.Qdelta, &s.qf.QB, &s.qf.Q3}) {
    CHECK((*Q - Q->transpose()).cwiseAbs().maxCoeff() <
          1e-12 * std::max(1.0, Q->cwiseAbs().maxCoeff()));
  }

  SECTION("constant forms are harmonic: their Qd and Qdelta rows vanish") {
    for (int comp = 0; comp < 2; ++comp) {
      const int idx = constant_form_index(s.basis, comp);
      REQUIRE(idx >= 0);
      CHECK(s.qf.Qd.row(idx).cwiseAbs().maxCoeff() < 1e-13);
      CHECK(s.qf.Qd.col(idx).cwiseAbs().maxCoeff() < 1e-13);
      CHECK(s.qf.Qdelta.row(idx).cwiseAbs().maxCoeff() < 1e-13);
      CHECK(s.qf.QB.row(idx).cwiseAbs().maxCoeff() < 1e-13);
    }
  }

  SECTION("flat Weitzenboeck: QB = Qd + Qdelta entrywise on tori") {
    const double scale = s.qf.QB.cwiseAbs().maxCoeff();
    CHECK((s.qf.QB - s.qf.Qd - s.qf.Qdelta).cwiseAbs().maxCoeff() <
          1e-10 * scale);
    const auto s3 =
        make(ManifoldSpec::flat_torus(3, {2 * M_PI, 1.0, 3.0}), 2, 1, 4);
    const double scale3 = s3.qf.QB.cwiseAbs().maxCoeff();
    CHECK((s3.qf.QB - s3.qf.Qd - s3.qf.Qdelta).cwiseAbs().maxCoeff() <
          1e-10 * scale3);
  }

  SECTION("energy decomposition identity holds entrywise") {
    const Eigen::MatrixXd combo = s.qf.QB - s.qf.Qd / 2.0 - s.qf.Qdelta / 2.0;
    CHECK((s.qf.Q3 - combo).cwiseAbs().maxCoeff() <
          1e-12 * std::max(1.0, s.qf.QB.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("assembly rejects a degenerate basis") {
  const auto spec = ManifoldSpec::flat_torus(2, {2 * M_PI, 2 * M_PI});
  const auto grid = build_grid(spec, 8);
  auto basis = build_basis(spec, grid, 1, 2);
  // duplicated element: the mass matrix loses positive definiteness
  basis.values.col(1) = basis.values.col(0);
  basis.derivs.col(1) = basis.derivs.col(0);
  yano::detail::compute_mass(grid, basis);
  CHECK_THROWS_AS(assemble(spec, grid, basis), std::runtime_error);
}

TEST_CASE("assembly on the round sphere: PSD of the Killing energy") {
  const auto s = make(ManifoldSpec::conformal_sphere(), 1, 4, 10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es3(s.qf.Q3,
                                                     Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esB(s.qf.QB,
                                                     Eigen::EigenvaluesOnly);
  const double qb_norm = esB.eigenvalues().cwiseAbs().maxCoeff();
  CHECK(es3.eigenvalues().minCoeff() >= -1e-10 * qb_norm);
  for (const auto* Q : {&s.qf.Qd, &s.qf.Qdelta, &s.qf.QB}) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*Q,
                                                      Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-11 * qb_norm);
  }
}

TEST_CASE("kernel detection policy") {
  SECTION("identity form has an empty kernel") {
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(6, 6);
    const auto sr = kernel_dim(M, M);
    CHECK(sr.kernel_dim == 0);
    CHECK(sr.clean());
  }

  SECTION("synthetic spectrum {1e-14, 1e-14, 0.37, ...} under defaults") {
    Eigen::VectorXd d(5);
    d << 1e-14, 1e-14, 0.37, 0.9, 1.3;
    const Eigen::MatrixXd Q = d.asDiagonal();
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(5, 5);
    const auto sr = kernel_dim(Q, M);
    CHECK(sr.kernel_dim == 2);
    CHECK(sr.clean());
    CHECK(sr.gap_ratio > 1e12);
  }

  SECTION("a closing gap flags the spectrum ambiguous") {
    Eigen::VectorXd d(5);
    d << 1e-12, 5e-11, 0.5, 0.9, 1.3;
    const Eigen::MatrixXd Q = d.asDiagonal();
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(5, 5);
    TolerancePolicy strict;
    strict.gap_min = 1e12;
    const auto sr = kernel_dim(Q, M, strict);
    CHECK(sr.status == SpectrumStatus::ambiguous);
    CHECK_THROWS_AS(kernel_basis(Q, M, strict), std::runtime_error);
  }

  SECTION("scaling invariance of the kernel count") {
    const auto s =
        make(ManifoldSpec::flat_torus(2, {2 * M_PI, 2 * M_PI}), 1, 2, 8);
    for (double alpha : {1e-3, 1.0, 1e3}) {
      const auto sr = kernel_dim(Eigen::MatrixXd(alpha * s.qf.Q3), s.qf.M);
      CHECK(sr.kernel_dim == 2);
      CHECK(sr.clean());
    }
  }

  SECTION("non-positive-definite mass is rejected") {
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(4, 4);
    M(2, 2) = -1.0;
    CHECK_THROWS_AS(kernel_dim(M, M), std::invalid_argument);
  }
}

TEST_CASE("round sphere spectra against the spherical-harmonic oracle") {
  const auto s = make(ManifoldSpec::conformal_sphere(), 1, 8, 24);

  SECTION("Hodge form: no kernel, lowest eigenvalue l(l+1) = 2") {
    const auto sr = kernel_dim(Eigen::MatrixXd(s.qf.Qd + s.qf.Qdelta), s.qf.M);
    CHECK(sr.kernel_dim == 0);
    CHECK(sr.clean());
    CHECK(sr.eigenvalues.front() == Catch::Approx(2.0).margin(1e-8));
  }

  SECTION("conformal-Killing kernel: 6 M-orthonormal fields") {
    const auto kb = kernel_basis(s.qf.Q3, s.qf.M);
    REQUIRE(kb.cols() == 6);
    const Eigen::MatrixXd gram = kb.transpose() * s.qf.M * kb;
    CHECK((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <
          1e-10);
    const auto sr = kernel_dim(s.qf.Q3, s.qf.M);
    for (int i = 0; i < kb.cols(); ++i)
      CHECK(rayleigh(s.qf.Q3, s.qf.M, kb.col(i)) < sr.abs_tol_used);
  }

  SECTION("Killing kernel: 3 fields, and kernel-of-sum = intersection") {
    const Eigen::MatrixXd K = s.qf.Q3 + s.qf.Qdelta;
    const auto kb = kernel_basis(K, s.qf.M);
    REQUIRE(kb.cols() == 3);
    const auto sr = kernel_dim(K, s.qf.M);
    for (int i = 0; i < kb.cols(); ++i) {
      CHECK(rayleigh(s.qf.Q3, s.qf.M, kb.col(i)) < sr.abs_tol_used);
      CHECK(rayleigh(s.qf.Qdelta, s.qf.M, kb.col(i)) < sr.abs_tol_used);
    }
  }
}

TEST_CASE("torus kernels and refinement stability") {
  const auto coarse =
      make(ManifoldSpec::flat_torus(2, {2 * M_PI, 2 * M_PI}), 1, 2, 8);
  const auto fine =
      make(ManifoldSpec::flat_torus(2, {2 * M_PI, 2 * M_PI}), 1, 4, 12);

  SECTION("harmonic kernel spans the constant forms") {
    const auto kb = kernel_basis(
        Eigen::MatrixXd(coarse.qf.Qd + coarse.qf.Qdelta), coarse.qf.M);
    REQUIRE(kb.cols() == 2);
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(coarse.basis.size());
    dx(constant_form_index(coarse.basis, 0)) = 1.0;
    Eigen::VectorXd proj = Eigen::VectorXd::Zero(dx.size());
    for (int i = 0; i < kb.cols(); ++i)
      proj += kb.col(i) * (kb.col(i).dot(coarse.qf.M * dx));
    const double res = std::sqrt((dx - proj).dot(coarse.qf.M * (dx - proj)) /
                                 dx.dot(coarse.qf.M * dx));
    CHECK(res < 1e-10);
  }

  SECTION("kernel dimensions are stable under refinement") {
    auto dims = [](const QuadraticForms& qf) {
      return std::array<int, 4>{
          kernel_dim(Eigen::MatrixXd(qf.Qd + qf.Qdelta), qf.M).kernel_dim,
          kernel_dim(qf.Q3, qf.M).kernel_dim,
          kernel_dim(Eigen::MatrixXd(qf.Q3 + qf.Qd), qf.M).kernel_dim,
          kernel_dim(Eigen::MatrixXd(qf.Q3 + qf.Qdelta), qf.M).kernel_dim};
    };
    CHECK(dims(coarse.qf) == dims(fine.qf));
    CHECK(dims(coarse.qf) == std::array<int, 4>{2, 2, 2, 2});
  }
}
