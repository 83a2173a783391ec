#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "yano/forms.hpp"
#include "yano/operators.hpp"

// Closed-form solution families of the three defining equations, and
// residual checkers that evaluate those equations from analytic derivatives
// plus connection coefficients only -- independent of the spectral bases and
// Gram assembly they certify.

namespace yano {

enum class Provenance {
  torus_parallel,
  flat_killing,
  sphere_rotation,
  sphere_gradient,
  wedge_construct,
};

// Componentwise closed-form r-form. The evaluator fills background-frame
// components (sorted tuples) and their background frame-direction derivatives
// dcomps[a*C + j] = e_a(comp_j) at a coordinate point.
struct AnalyticForm {
  int n = 0;
  int degree = 0;
  Provenance provenance = Provenance::torus_parallel;
  std::string name;
  std::function<void(const double* coord, double* comps, double* dcomps)> eval;
};

inline std::vector<AnalyticForm> torus_parallel_basis(int n, int r) {
  if (r < 1 || r > n - 1)
    throw std::invalid_argument("torus_parallel_basis: need 1 <= r <= n-1");
  const auto di = make_degree_index(n, r);
  const int C = di.count();
  std::vector<AnalyticForm> out;
  for (int j = 0; j < C; ++j) {
    AnalyticForm f;
    f.n = n;
    f.degree = r;
    f.provenance = Provenance::torus_parallel;
    f.name = "parallel[" + std::to_string(j) + "]";
    f.eval = [C, n, j](const double*, double* comps, double* dcomps) {
      for (int q = 0; q < C; ++q) comps[q] = q == j ? 1.0 : 0.0;
      for (int q = 0; q < n * C; ++q) dcomps[q] = 0.0;
    };
    out.push_back(std::move(f));
  }
  return out;
}

// Chart-level Killing r-forms on a flat chart: all skew constants plus all
// x-linear families with fully antisymmetric coefficients. Count
// C(n, r) + C(n, r+1) = C(n+1, r+1). The linear members are not periodic, so
// on a torus they are residual-test objects only, never global sections.
inline std::vector<AnalyticForm> flat_killing_basis(int n, int r) {
  if (r < 1 || r > n - 1)
    throw std::invalid_argument("flat_killing_basis: need 1 <= r <= n-1");
  std::vector<AnalyticForm> out = torus_parallel_basis(n, r);
  for (auto& f : out) f.provenance = Provenance::flat_killing;
  const auto di = make_degree_index(n, r);
  const auto dh = make_degree_index(n, r + 1);
  const int C = di.count();
  for (int s = 0; s < dh.count(); ++s) {
    const unsigned S = dh.masks[s];
    AnalyticForm f;
    f.n = n;
    f.degree = r;
    f.provenance = Provenance::flat_killing;
    f.name = "rotational[" + std::to_string(s) + "]";
    f.eval = [n, C, S, di](const double* coord, double* comps, double* dcomps) {
      for (int q = 0; q < C; ++q) comps[q] = 0.0;
      for (int q = 0; q < n * C; ++q) dcomps[q] = 0.0;
      for (int j = 0; j < C; ++j) {
        const unsigned J = di.masks[j];
        if ((J & S) != J) continue;
        const unsigned rest = S & ~J;
        if (std::popcount(rest) != 1) continue;
        const int q = std::countr_zero(rest);
        const int sign = insert_sign(q, J);
        comps[j] = sign * coord[q];
        dcomps[q * C + j] = sign;
      }
    };
    out.push_back(std::move(f));
  }
  return out;
}

namespace detail {

// The three ambient coordinate functions restricted to S^2, with their
// first and second frame derivatives in the round frame.
struct AmbientLinear {
  // returns value, a[2] = (d_theta, d_phi/sin), da[a][b] = e_a(a_b)
  static void jet(int axis, double theta, double phi, double& val, double a[2],
                  double da[2][2]) {
    const double s = std::sin(theta), c = std::cos(theta);
    const double cp = std::cos(phi), sp = std::sin(phi);
    switch (axis) {
      case 0:  // x = sin t cos p
        val = s * cp;
        a[0] = c * cp;
        a[1] = -sp;
        da[0][0] = -s * cp;
        da[0][1] = 0.0;
        da[1][0] = -c * sp / s;
        da[1][1] = -cp / s;
        break;
      case 1:  // y = sin t sin p
        val = s * sp;
        a[0] = c * sp;
        a[1] = cp;
        da[0][0] = -s * sp;
        da[0][1] = 0.0;
        da[1][0] = c * cp / s;
        da[1][1] = -sp / s;
        break;
      default:  // z = cos t
        val = c;
        a[0] = -s;
        a[1] = 0.0;
        da[0][0] = -c;
        da[0][1] = 0.0;
        da[1][0] = 0.0;
        da[1][1] = 0.0;
        break;
    }
  }
};

}  // namespace detail

// The six conformal Killing 1-forms of the round sphere: the duals of the
// three rotation fields (Killing) and the gradients of the three restricted
// ambient linear functions (closed conformal Killing).
inline std::vector<AnalyticForm> sphere_ck_basis() {
  std::vector<AnalyticForm> out;
  const char* axis_name[3] = {"x", "y", "z"};
  for (int kind = 0; kind < 2; ++kind) {
    for (int axis = 0; axis < 3; ++axis) {
      AnalyticForm f;
      f.n = 2;
      f.degree = 1;
      f.provenance = kind == 0 ? Provenance::sphere_rotation
                               : Provenance::sphere_gradient;
      f.name = std::string(kind == 0 ? "rotation_" : "gradient_") +
               axis_name[axis];
      f.eval = [kind, axis](const double* coord, double* comps,
                            double* dcomps) {
        double val, a[2], da[2][2];
        detail::AmbientLinear::jet(axis, coord[0], coord[1], val, a, da);
        if (kind == 1) {
          comps[0] = a[0];
          comps[1] = a[1];
          dcomps[0 * 2 + 0] = da[0][0];
          dcomps[0 * 2 + 1] = da[0][1];
          dcomps[1 * 2 + 0] = da[1][0];
          dcomps[1 * 2 + 1] = da[1][1];
        } else {
          // star of the gradient: (a1, a2) -> (-a2, a1)
          comps[0] = -a[1];
          comps[1] = a[0];
          dcomps[0 * 2 + 0] = -da[0][1];
          dcomps[0 * 2 + 1] = da[0][0];
          dcomps[1 * 2 + 0] = -da[1][1];
          dcomps[1 * 2 + 1] = da[1][0];
        }
      };
      out.push_back(std::move(f));
    }
  }
  return out;
}

// Conformal rescaling omega -> e^{w f} omega on the sphere (background-frame
// components; derivatives by the chain rule). With w = r + 1 this maps
// conformal Killing forms of g_round to conformal Killing forms of e^{2f} g.
inline AnalyticForm conformal_scale(const AnalyticForm& form,
                                    const SphExpansion& f, double weight) {
  if (form.n != 2)
    throw std::invalid_argument("conformal_scale: sphere forms only");
  AnalyticForm out = form;
  out.name = form.name + "*e^{" + std::to_string(weight) + "f}";
  const int C = binomial(form.n, form.degree);
  const int n = form.n;
  auto inner = form.eval;
  out.eval = [inner, f, weight, C, n](const double* coord, double* comps,
                                      double* dcomps) {
    inner(coord, comps, dcomps);
    const auto fj = f.jet(coord[0], coord[1]);
    const double h = std::exp(weight * fj.val);
    const double fb[2] = {fj.dt, fj.dp / std::sin(coord[0])};
    for (int a = n - 1; a >= 0; --a)
      for (int j = 0; j < C; ++j)
        dcomps[a * C + j] =
            h * (dcomps[a * C + j] + weight * fb[a] * comps[j]);
    for (int j = 0; j < C; ++j) comps[j] *= h;
  };
  return out;
}

// Pointwise wedge of two analytic forms (product rule for the derivatives).
inline AnalyticForm wedge_analytic(const AnalyticForm& a,
                                   const AnalyticForm& b) {
  if (a.n != b.n || a.degree + b.degree > a.n)
    throw std::invalid_argument("wedge_analytic: degree overflow");
  AnalyticForm out;
  out.n = a.n;
  out.degree = a.degree + b.degree;
  out.provenance = Provenance::wedge_construct;
  out.name = a.name + "^" + b.name;
  const int n = a.n;
  const auto da = make_degree_index(n, a.degree);
  const auto db = make_degree_index(n, b.degree);
  const auto dk = make_degree_index(n, out.degree);
  const int Ca = da.count(), Cb = db.count(), Ck = dk.count();
  auto ea = a.eval, eb = b.eval;
  out.eval = [=](const double* coord, double* comps, double* dcomps) {
    std::vector<double> va(Ca), dva(n * Ca), vb(Cb), dvb(n * Cb);
    ea(coord, va.data(), dva.data());
    eb(coord, vb.data(), dvb.data());
    for (int q = 0; q < Ck; ++q) comps[q] = 0.0;
    for (int q = 0; q < n * Ck; ++q) dcomps[q] = 0.0;
    for (int k = 0; k < Ck; ++k) {
      const unsigned K = dk.masks[k];
      for (int j = 0; j < Ca; ++j) {
        const unsigned J = da.masks[j];
        if ((J & K) != J) continue;
        const unsigned Q = K & ~J;
        const int qb = db.index_of[Q];
        const int sgn = merge_sign(J, Q);
        comps[k] += sgn * va[j] * vb[qb];
        for (int dir = 0; dir < n; ++dir)
          dcomps[dir * Ck + k] += sgn * (dva[dir * Ca + j] * vb[qb] +
                                         va[j] * dvb[dir * Cb + qb]);
      }
    }
  };
  return out;
}

// Analytic field sampled on a grid: components and full covariant derivative
// in the orthonormal frame of the current metric.
struct SampledForm {
  FormValues vals;
  CovValues cov;
};

inline SampledForm sample_on_grid(const AnalyticForm& form,
                                  const QuadratureGrid& grid) {
  if (form.n != grid.n)
    throw std::invalid_argument("sample_on_grid: dimension mismatch");
  const int n = grid.n;
  const int r = form.degree;
  const auto di = make_degree_index(n, r);
  const int C = di.count();
  const int N = grid.node_count();
  SampledForm out;
  out.vals.degree = r;
  out.vals.vals.resize(N, C);
  out.cov.degree = r;
  out.cov.vals.resize(N, n * C);
  std::vector<double> comps(C), dcomps(static_cast<size_t>(n) * C);
  std::vector<double> coord(n);
  for (int i = 0; i < N; ++i) {
    for (int d = 0; d < n; ++d) coord[d] = grid.nodes(i, d);
    form.eval(coord.data(), comps.data(), dcomps.data());
    const double f = grid.conf_f(i);
    const double efr = std::exp(-r * f);
    const double efr1 = std::exp(-(r + 1.0) * f);
    // frame-rescaled components and directional derivatives
    std::vector<double> ab(C), eab(static_cast<size_t>(n) * C);
    for (int j = 0; j < C; ++j) ab[j] = efr * comps[j];
    for (int a = 0; a < n; ++a)
      for (int j = 0; j < C; ++j)
        eab[a * C + j] =
            efr1 * (dcomps[a * C + j] - r * grid.conf_df(i, a) * comps[j]);
    // connection correction on every index slot
    for (int a = 0; a < n; ++a)
      for (int j = 0; j < C; ++j) {
        double v = eab[a * C + j];
        const unsigned J = di.masks[j];
        for (int b = 0; b < n; ++b) {
          if (!(J & (1u << b))) continue;
          const unsigned rest = J & ~(1u << b);
          for (int c = 0; c < n; ++c) {
            if (rest & (1u << c)) continue;
            const double gabc = grid.gamma(i, (a * n + b) * n + c);
            if (gabc == 0.0) continue;
            const int sign = insert_sign(b, rest) * insert_sign(c, rest);
            v -= gabc * sign * ab[di.index_of[rest | (1u << c)]];
          }
        }
        out.cov.vals(i, a * C + j) = v;
      }
    for (int j = 0; j < C; ++j) out.vals.vals(i, j) = ab[j];
  }
  return out;
}

namespace detail {

inline Eigen::VectorXd row_norms(const Eigen::MatrixXd& m) {
  return m.rowwise().norm();
}

struct ResidualParts {
  double ck = 0.0, killing = 0.0, closed_ck = 0.0;
};

inline ResidualParts defining_residuals(const SampledForm& s, int n) {
  const int r = s.vals.degree;
  const double field_norm = row_norms(s.vals.vals).maxCoeff();
  if (!(field_norm > 0.0))
    throw std::invalid_argument("residual: zero field");
  const double cov_norm = row_norms(s.cov.vals).maxCoeff();
  const double denom =
      cov_norm > 1e-8 * field_norm ? cov_norm : field_norm;

  const FormValues d = exterior_d(n, s.cov);
  FormValues theta = trace_part(n, s.cov);
  theta.vals /= (n - r + 1.0);
  const Eigen::MatrixXd skew = skew_embed(n, r, d).vals / (r + 1.0);
  const Eigen::MatrixXd div = metric_wedge(n, r, theta).vals;

  ResidualParts out;
  out.ck = row_norms(s.cov.vals - skew - div).maxCoeff() / denom;
  out.killing = row_norms(s.cov.vals - skew).maxCoeff() / denom;
  out.closed_ck = row_norms(s.cov.vals - div).maxCoeff() / denom;
  return out;
}

}  // namespace detail

// Sup-norm residuals of the three defining equations, normalized by the
// largest node norm of nabla omega (or of omega when nabla omega vanishes).
inline double residual_ck(const AnalyticForm& form, const QuadratureGrid& grid) {
  return detail::defining_residuals(sample_on_grid(form, grid), grid.n).ck;
}
inline double residual_killing(const AnalyticForm& form,
                               const QuadratureGrid& grid) {
  return detail::defining_residuals(sample_on_grid(form, grid), grid.n).killing;
}
inline double residual_closed_ck(const AnalyticForm& form,
                                 const QuadratureGrid& grid) {
  return detail::defining_residuals(sample_on_grid(form, grid), grid.n)
      .closed_ck;
}

struct CrossCertifyEntry {
  std::string name;
  double projection_defect = 0.0;  // measured on the refined grid
  double rayleigh_rel = 0.0;       // vs. the spectrum scale of (Q, M)
  Eigen::VectorXd coeffs;
};

struct CrossCertifyReport {
  std::vector<CrossCertifyEntry> entries;
  int span_dim = 0;  // rank of the projected family (defect-passing members)
  double defect_tol = 1e-8;
};

// Project analytic solutions into the spectral basis, measure the projection
// defect on an independently refined grid, and check that the projections lie
// in the numerical kernel of Q and span a space of the expected dimension.
inline CrossCertifyReport cross_certify(const std::vector<AnalyticForm>& family,
                                        const QuadratureGrid& grid,
                                        const FormBasis& basis,
                                        const QuadratureGrid& fine_grid,
                                        const FormBasis& fine_basis,
                                        const Eigen::MatrixXd& Q,
                                        const Eigen::MatrixXd& M,
                                        const TolerancePolicy& policy = {}) {
  CrossCertifyReport rep;
  const double scale = kernel_dim(Q, M, policy).scale;
  std::vector<Eigen::VectorXd> passing;
  for (const auto& form : family) {
    CrossCertifyEntry e;
    e.name = form.name;
    const SampledForm coarse = sample_on_grid(form, grid);
    const FormField proj = project(grid, basis, coarse.vals);
    e.coeffs = proj.coeffs;
    const SampledForm fine = sample_on_grid(form, fine_grid);
    const FormValues recon = eval_values(fine_basis, proj);
    const double num = std::sqrt(integral_inner(
        fine_grid, fine.vals.vals - recon.vals, fine.vals.vals - recon.vals));
    const double den =
        std::sqrt(integral_inner(fine_grid, fine.vals.vals, fine.vals.vals));
    e.projection_defect = num / den;
    e.rayleigh_rel = rayleigh(Q, M, proj.coeffs) / scale;
    if (e.projection_defect < rep.defect_tol) passing.push_back(proj.coeffs);
    rep.entries.push_back(std::move(e));
  }
  if (!passing.empty()) {
    const int h = static_cast<int>(passing.size());
    Eigen::MatrixXd gram(h, h);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < h; ++j)
        gram(i, j) = passing[i].dot(M * passing[j]) /
                     std::sqrt(passing[i].dot(M * passing[i]) *
                               passing[j].dot(M * passing[j]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram,
                                                      Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    rep.span_dim = static_cast<int>(
        (es.eigenvalues().array() > 1e-8 * top).count());
  }
  return rep;
}

}  // namespace yano
