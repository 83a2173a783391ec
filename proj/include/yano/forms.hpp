#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "yano/grid.hpp"
#include "yano/multiindex.hpp"

// Spectral bases of r-forms and pointwise exterior algebra. Components are
// stored on sorted index tuples in the orthonormal frame of the current
// metric; with the (1/r!) full-contraction convention the pointwise inner
// product is the plain dot product of those component vectors.

namespace yano {

// Pointwise skew-component values of a degree-r field: node-major, one row
// per node, one column per sorted tuple.
struct FormValues {
  int degree = 0;
  Eigen::MatrixXd vals;  // N x C(n, degree)
};

// Pointwise covariant-derivative values: column a*C + j holds the derivative
// along frame direction a of component j.
struct CovValues {
  int degree = 0;
  Eigen::MatrixXd vals;  // N x (n * C(n, degree))
};

struct BasisLabel {
  // torus
  std::array<int, 4> freq{};
  int phase = 0;  // 0 = cos, 1 = sin
  int comp = 0;
  // sphere
  int family = 0;  // 0 = exact (dY), 1 = coexact (*dY)
  int l = 0, m = 0;
};

struct FormField {
  int degree = 0;
  int cutoff = 0;
  Eigen::VectorXd coeffs;
};

struct FormBasis {
  ManifoldKind kind = ManifoldKind::FlatTorus;
  int n = 0;
  int r = 0;
  int cutoff = 0;
  int nodes = 0;
  std::vector<BasisLabel> labels;
  Eigen::MatrixXd values;  // (N*C) x B, row = node*C + comp
  Eigen::MatrixXd derivs;  // (N*n*C) x B, row = node*n*C + a*C + comp
  Eigen::MatrixXd mass;    // B x B, L2 Gram

  int comps() const { return binomial(n, r); }
  int size() const { return static_cast<int>(values.cols()); }

  FormField field(const Eigen::VectorXd& coeffs) const {
    if (coeffs.size() != size())
      throw std::invalid_argument("field: coefficient length mismatch");
    return FormField{r, cutoff, coeffs};
  }
};

namespace detail {

inline void compute_mass(const QuadratureGrid& grid, FormBasis& basis) {
  const int C = basis.comps();
  const int N = basis.nodes;
  Eigen::MatrixXd vw = basis.values;
  for (int i = 0; i < N; ++i) {
    const double sw = std::sqrt(grid.weights(i));
    vw.middleRows(static_cast<Eigen::Index>(i) * C, C) *= sw;
  }
  basis.mass = vw.transpose() * vw;
}

// Torus Fourier mode representatives: k = 0 or first nonzero positive,
// |k|_inf <= cutoff, in lexicographic order.
inline std::vector<std::array<int, 4>> torus_mode_reps(int n, int cutoff) {
  std::vector<std::array<int, 4>> reps;
  std::array<int, 4> k{};
  std::vector<int> v(n, -cutoff);
  while (true) {
    int first = 0;
    for (int i = 0; i < n; ++i)
      if (v[i] != 0) {
        first = v[i];
        break;
      }
    if (first >= 0) {
      k.fill(0);
      for (int i = 0; i < n; ++i) k[i] = v[i];
      reps.push_back(k);
    }
    int i = n - 1;
    while (i >= 0 && v[i] == cutoff) --i;
    if (i < 0) break;
    ++v[i];
    for (int j = i + 1; j < n; ++j) v[j] = -cutoff;
  }
  return reps;
}

inline FormBasis build_torus_basis(const ManifoldSpec& spec,
                                   const QuadratureGrid& grid, int r,
                                   int cutoff) {
  const int n = spec.dims;
  const int need = 2 * cutoff + 1;
  if (grid.resolution < need)
    throw std::invalid_argument(
        "build_basis: torus resolution " + std::to_string(grid.resolution) +
        " cannot integrate cutoff " + std::to_string(cutoff) +
        " exactly; need resolution >= " + std::to_string(need));
  const auto di = make_degree_index(n, r);
  const int C = di.count();
  const int N = grid.node_count();
  const auto reps = torus_mode_reps(n, cutoff);
  int B = 0;
  for (const auto& k : reps) {
    bool zero = true;
    for (int i = 0; i < n; ++i) zero = zero && k[i] == 0;
    B += (zero ? 1 : 2) * C;
  }
  FormBasis basis;
  basis.kind = ManifoldKind::FlatTorus;
  basis.n = n;
  basis.r = r;
  basis.cutoff = cutoff;
  basis.nodes = N;
  basis.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N) * C, B);
  basis.derivs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N) * n * C, B);
  basis.labels.reserve(B);

  int col = 0;
  for (const auto& k : reps) {
    bool zero = true;
    double nu[4] = {0, 0, 0, 0};
    for (int i = 0; i < n; ++i) {
      nu[i] = 2.0 * M_PI * k[i] / spec.periods[i];
      zero = zero && k[i] == 0;
    }
    const int phases = zero ? 1 : 2;
    for (int phase = 0; phase < phases; ++phase) {
      for (int j = 0; j < C; ++j, ++col) {
        BasisLabel lab;
        lab.freq = k;
        lab.phase = phase;
        lab.comp = j;
        basis.labels.push_back(lab);
        for (int row = 0; row < N; ++row) {
          double arg = 0.0;
          for (int i = 0; i < n; ++i) arg += nu[i] * grid.nodes(row, i);
          const double cv = std::cos(arg), sv = std::sin(arg);
          const double val = phase == 0 ? cv : sv;
          basis.values(static_cast<Eigen::Index>(row) * C + j, col) = val;
          for (int a = 0; a < n; ++a) {
            const double dval = phase == 0 ? -nu[a] * sv : nu[a] * cv;
            basis.derivs(static_cast<Eigen::Index>(row) * n * C + a * C + j,
                         col) = dval;
          }
        }
      }
    }
  }
  compute_mass(grid, basis);
  return basis;
}

// Background-frame components and frame derivatives of one sphere basis
// element at one node. family 0: dY; family 1: *dY.
inline void sphere_element_background(const ScalarJet& y, double theta,
                                      int family, double comp[2],
                                      double dcomp[2][2]) {
  const double s = std::sin(theta), c = std::cos(theta);
  const double a1 = y.dt;
  const double a2 = y.dp / s;
  const double e1a1 = y.dtt;
  const double e2a1 = y.dtp / s;
  const double e1a2 = y.dtp / s - c * y.dp / (s * s);
  const double e2a2 = y.dpp / (s * s);
  if (family == 0) {
    comp[0] = a1;
    comp[1] = a2;
    dcomp[0][0] = e1a1;
    dcomp[0][1] = e1a2;
    dcomp[1][0] = e2a1;
    dcomp[1][1] = e2a2;
  } else {
    comp[0] = -a2;
    comp[1] = a1;
    dcomp[0][0] = -e1a2;
    dcomp[0][1] = e1a1;
    dcomp[1][0] = -e2a2;
    dcomp[1][1] = e2a1;
  }
}

inline FormBasis build_sphere_basis(const ManifoldSpec& spec,
                                    const QuadratureGrid& grid, int r,
                                    int cutoff) {
  const int need = min_resolution(spec, cutoff);
  if (grid.resolution < need)
    throw std::invalid_argument(
        "build_basis: sphere resolution " + std::to_string(grid.resolution) +
        " is under-resolved for cutoff " + std::to_string(cutoff) +
        "; need resolution >= " + std::to_string(need));
  const int N = grid.node_count();
  FormBasis basis;
  basis.kind = ManifoldKind::ConformalSphere;
  basis.n = 2;
  basis.r = r;
  basis.cutoff = cutoff;
  basis.nodes = N;

  if (r == 0) {
    const int B = (cutoff + 1) * (cutoff + 1);
    basis.values.resize(N, B);
    basis.derivs.resize(static_cast<Eigen::Index>(N) * 2, B);
    int col = 0;
    for (int l = 0; l <= cutoff; ++l)
      for (int m = -l; m <= l; ++m, ++col) {
        BasisLabel lab;
        lab.l = l;
        lab.m = m;
        basis.labels.push_back(lab);
        for (int row = 0; row < N; ++row) {
          const double theta = grid.nodes(row, 0), phi = grid.nodes(row, 1);
          const auto y = real_ylm_jet(l, m, theta, phi);
          const double ef = std::exp(-grid.conf_f(row));
          basis.values(row, col) = y.val;
          basis.derivs(static_cast<Eigen::Index>(row) * 2 + 0, col) =
              ef * y.dt;
          basis.derivs(static_cast<Eigen::Index>(row) * 2 + 1, col) =
              ef * y.dp / std::sin(theta);
        }
      }
    compute_mass(grid, basis);
    return basis;
  }

  const int B = 2 * (cutoff * cutoff + 2 * cutoff);
  basis.values.resize(static_cast<Eigen::Index>(N) * 2, B);
  basis.derivs.resize(static_cast<Eigen::Index>(N) * 4, B);
  int col = 0;
  for (int family = 0; family < 2; ++family)
    for (int l = 1; l <= cutoff; ++l)
      for (int m = -l; m <= l; ++m, ++col) {
        BasisLabel lab;
        lab.family = family;
        lab.l = l;
        lab.m = m;
        basis.labels.push_back(lab);
        for (int row = 0; row < N; ++row) {
          const double theta = grid.nodes(row, 0), phi = grid.nodes(row, 1);
          const auto y = real_ylm_jet(l, m, theta, phi);
          double a[2], da[2][2];
          sphere_element_background(y, theta, family, a, da);
          const double ef = std::exp(-grid.conf_f(row));
          const double e2f = ef * ef;
          const double fb[2] = {grid.conf_df(row, 0), grid.conf_df(row, 1)};
          double ab[2], cov[2][2];
          for (int b = 0; b < 2; ++b) ab[b] = ef * a[b];
          for (int aidx = 0; aidx < 2; ++aidx)
            for (int b = 0; b < 2; ++b) {
              double v = e2f * (da[aidx][b] - fb[aidx] * a[b]);
              for (int cidx = 0; cidx < 2; ++cidx)
                v -= grid.gamma(row, (aidx * 2 + b) * 2 + cidx) * ab[cidx];
              cov[aidx][b] = v;
            }
          basis.values(static_cast<Eigen::Index>(row) * 2 + 0, col) = ab[0];
          basis.values(static_cast<Eigen::Index>(row) * 2 + 1, col) = ab[1];
          for (int aidx = 0; aidx < 2; ++aidx)
            for (int b = 0; b < 2; ++b)
              basis.derivs(static_cast<Eigen::Index>(row) * 4 + aidx * 2 + b,
                           col) = cov[aidx][b];
        }
      }
  compute_mass(grid, basis);
  return basis;
}

inline FormBasis build_any_degree(const ManifoldSpec& spec,
                                  const QuadratureGrid& grid, int r,
                                  int cutoff) {
  spec.validate();
  if (cutoff < 1) throw std::invalid_argument("build_basis: cutoff must be >= 1");
  if (spec.kind == ManifoldKind::FlatTorus)
    return build_torus_basis(spec, grid, r, cutoff);
  if (r != 0 && r != 1)
    throw std::invalid_argument(
        "build_basis: the 2-sphere admits only r = 1 (n = 2)");
  return build_sphere_basis(spec, grid, r, cutoff);
}

}  // namespace detail

inline FormBasis build_basis(const ManifoldSpec& spec,
                             const QuadratureGrid& grid, int r, int cutoff) {
  if (r < 1 || r > spec.dims - 1)
    throw std::invalid_argument("build_basis: need 1 <= r <= n-1");
  return detail::build_any_degree(spec, grid, r, cutoff);
}

// Degree-0 companion basis (projection target for associated forms).
inline FormBasis build_scalar_basis(const ManifoldSpec& spec,
                                    const QuadratureGrid& grid, int cutoff) {
  return detail::build_any_degree(spec, grid, 0, cutoff);
}

inline FormValues eval_values(const FormBasis& basis, const FormField& field) {
  if (field.coeffs.size() != basis.size() || field.degree != basis.r)
    throw std::invalid_argument("eval_values: field does not match basis");
  const int C = basis.comps();
  Eigen::VectorXd flat = basis.values * field.coeffs;
  FormValues out;
  out.degree = basis.r;
  out.vals = Eigen::Map<
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), basis.nodes, C);
  return out;
}

inline CovValues covariant_derivative(const FormBasis& basis,
                                      const FormField& field) {
  if (field.coeffs.size() != basis.size() || field.degree != basis.r)
    throw std::invalid_argument("covariant_derivative: field/basis mismatch");
  const int w = basis.n * basis.comps();
  Eigen::VectorXd flat = basis.derivs * field.coeffs;
  CovValues out;
  out.degree = basis.r;
  out.vals = Eigen::Map<
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), basis.nodes, w);
  return out;
}

// d = alternation of the covariant derivative (torsion-free connection).
inline FormValues exterior_d(int n, const CovValues& cov) {
  const int r = cov.degree;
  const auto src = make_degree_index(n, r);
  const auto dst = make_degree_index(n, r + 1);
  const int C = src.count();
  FormValues out;
  out.degree = r + 1;
  out.vals = Eigen::MatrixXd::Zero(cov.vals.rows(), dst.count());
  for (int t = 0; t < dst.count(); ++t) {
    const unsigned T = dst.masks[t];
    for (int a = 0; a < n; ++a) {
      if (!(T & (1u << a))) continue;
      const unsigned rest = T & ~(1u << a);
      const int j = src.index_of[rest];
      const int sign = insert_sign(a, rest);
      out.vals.col(t) += sign * cov.vals.col(a * C + j);
    }
  }
  return out;
}

// d* = -contraction of the covariant derivative; the formal adjoint of d.
inline FormValues codifferential(int n, const CovValues& cov) {
  const int r = cov.degree;
  const auto src = make_degree_index(n, r);
  const auto dst = make_degree_index(n, r - 1);
  const int C = src.count();
  FormValues out;
  out.degree = r - 1;
  out.vals = Eigen::MatrixXd::Zero(cov.vals.rows(), dst.count());
  for (int jp = 0; jp < dst.count(); ++jp) {
    const unsigned Jp = dst.masks[jp];
    for (int a = 0; a < n; ++a) {
      const auto sc = prepend(src, a, Jp);
      if (sc.comp < 0) continue;
      out.vals.col(jp) -= sc.sign * cov.vals.col(a * C + sc.comp);
    }
  }
  return out;
}

// Divergence-slot trace of nabla omega; equals -(d* omega).
inline FormValues trace_part(int n, const CovValues& cov) {
  FormValues out = codifferential(n, cov);
  out.vals = -out.vals;
  return out;
}

// (g wedge theta)_{a;J} = sign * theta_{J \ a} when a lies in J. At r = 1 this
// is theta * g in frame components. tr(g wedge theta) = (n - r + 1) theta.
inline CovValues metric_wedge(int n, int r, const FormValues& theta) {
  if (theta.degree != r - 1)
    throw std::invalid_argument("metric_wedge: theta must have degree r - 1");
  const auto di = make_degree_index(n, r);
  const auto dl = make_degree_index(n, r - 1);
  const int C = di.count();
  CovValues out;
  out.degree = r;
  out.vals = Eigen::MatrixXd::Zero(theta.vals.rows(), n * C);
  for (int j = 0; j < C; ++j) {
    const unsigned J = di.masks[j];
    for (int a = 0; a < n; ++a) {
      if (!(J & (1u << a))) continue;
      const unsigned rest = J & ~(1u << a);
      out.vals.col(a * C + j) =
          insert_sign(a, rest) * theta.vals.col(dl.index_of[rest]);
    }
  }
  return out;
}

// Embed a (r+1)-form back into the derivative slot: the skew part of a
// covariant derivative is (1/(r+1)) times this embedding of d omega.
inline CovValues skew_embed(int n, int r, const FormValues& dvals) {
  if (dvals.degree != r + 1)
    throw std::invalid_argument("skew_embed: values must have degree r + 1");
  const auto di = make_degree_index(n, r);
  const auto dh = make_degree_index(n, r + 1);
  const int C = di.count();
  CovValues out;
  out.degree = r;
  out.vals = Eigen::MatrixXd::Zero(dvals.vals.rows(), n * C);
  for (int j = 0; j < C; ++j) {
    const unsigned J = di.masks[j];
    for (int a = 0; a < n; ++a) {
      const auto sc = prepend(dh, a, J);
      if (sc.comp < 0) continue;
      out.vals.col(a * C + j) = sc.sign * dvals.vals.col(sc.comp);
    }
  }
  return out;
}

// The conformal-Killing remainder of a covariant derivative: nabla omega
// minus its skew part minus its divergence part. The three pieces are
// pointwise orthogonal, so <D3,D3> = <nabla,nabla> - (1/(r+1))<d,d>
// - (1/(n-r+1))<d*,d*>.
inline CovValues ck_remainder(int n, const CovValues& cov) {
  const int r = cov.degree;
  const FormValues d = exterior_d(n, cov);
  const FormValues tr = trace_part(n, cov);
  CovValues out;
  out.degree = r;
  out.vals = cov.vals - skew_embed(n, r, d).vals / (r + 1.0) -
             metric_wedge(n, r, tr).vals / (n - r + 1.0);
  return out;
}

// Pointwise alternating product on sorted components.
inline FormValues wedge(int n, const FormValues& a, const FormValues& b) {
  const int p = a.degree, q = b.degree;
  if (p + q > n) throw std::invalid_argument("wedge: degree overflow");
  const auto da = make_degree_index(n, p);
  const auto db = make_degree_index(n, q);
  const auto dk = make_degree_index(n, p + q);
  FormValues out;
  out.degree = p + q;
  out.vals = Eigen::MatrixXd::Zero(a.vals.rows(), dk.count());
  for (int k = 0; k < dk.count(); ++k) {
    const unsigned K = dk.masks[k];
    // all subsets J of K with |J| = p
    for (int j = 0; j < da.count(); ++j) {
      const unsigned J = da.masks[j];
      if ((J & K) != J) continue;
      const unsigned Q = K & ~J;
      out.vals.col(k) += merge_sign(J, Q) *
                         (a.vals.col(j).array() * b.vals.col(db.index_of[Q]).array())
                             .matrix();
    }
  }
  return out;
}

// Frame Hodge star on sorted components: star(e^J) = merge_sign(J, J^c) e^{J^c}.
inline FormValues star_values(int n, const FormValues& a) {
  const int r = a.degree;
  const auto ds = make_degree_index(n, r);
  const auto dd = make_degree_index(n, n - r);
  const unsigned full = (1u << n) - 1u;
  FormValues out;
  out.degree = n - r;
  out.vals = Eigen::MatrixXd::Zero(a.vals.rows(), dd.count());
  for (int j = 0; j < ds.count(); ++j) {
    const unsigned J = ds.masks[j];
    const unsigned K = full & ~J;
    out.vals.col(dd.index_of[K]) = merge_sign(J, K) * a.vals.col(j);
  }
  return out;
}

// Integrated inner product of two pointwise arrays with matching layout.
inline double integral_inner(const QuadratureGrid& grid,
                             const Eigen::MatrixXd& a,
                             const Eigen::MatrixXd& b) {
  return ((a.array() * b.array()).rowwise().sum() * grid.weights.array()).sum();
}

// L2 projection of pointwise values onto a basis.
inline FormField project(const QuadratureGrid& grid, const FormBasis& basis,
                         const FormValues& values) {
  if (values.degree != basis.r)
    throw std::invalid_argument("project: degree mismatch");
  const int C = basis.comps();
  const int N = basis.nodes;
  Eigen::VectorXd wflat(static_cast<Eigen::Index>(N) * C);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < C; ++j)
      wflat(static_cast<Eigen::Index>(i) * C + j) =
          grid.weights(i) * values.vals(i, j);
  const Eigen::VectorXd rhs = basis.values.transpose() * wflat;
  return basis.field(basis.mass.llt().solve(rhs));
}

inline double l2_inner(const FormBasis& basis, const FormField& a,
                       const FormField& b) {
  if (a.degree != basis.r || b.degree != basis.r ||
      a.coeffs.size() != basis.size() || b.coeffs.size() != basis.size())
    throw std::invalid_argument("l2_inner: basis mismatch");
  return a.coeffs.dot(basis.mass * b.coeffs);
}

// Pointwise star followed by L2 projection onto the dual-degree basis.
inline FormField hodge_star(const QuadratureGrid& grid, const FormBasis& src,
                            const FormBasis& dst, const FormField& field) {
  if (dst.r != src.n - src.r)
    throw std::invalid_argument("hodge_star: target basis has wrong degree");
  if (dst.cutoff != src.cutoff)
    throw std::invalid_argument("hodge_star: cutoff mismatch");
  return project(grid, dst, star_values(src.n, eval_values(src, field)));
}

// Associated form: the divergence part of nabla omega is g wedge theta with
// theta = tr(nabla omega)/(n-r+1); on true conformal Killing fields this is
// the (r-1)-form entering the defining equation.
inline FormField associated_form(const QuadratureGrid& grid,
                                 const FormBasis& basis,
                                 const FormBasis& target,
                                 const FormField& field) {
  if (basis.r < 1) throw std::invalid_argument("associated_form: need r >= 1");
  if (target.r != basis.r - 1)
    throw std::invalid_argument("associated_form: target degree must be r - 1");
  if (target.cutoff != basis.cutoff)
    throw std::invalid_argument("associated_form: cutoff mismatch");
  FormValues theta = trace_part(basis.n, covariant_derivative(basis, field));
  theta.vals /= (basis.n - basis.r + 1.0);
  return project(grid, target, theta);
}

inline nlohmann::ordered_json to_json(const FormField& f) {
  nlohmann::ordered_json j;
  j["degree"] = f.degree;
  j["cutoff"] = f.cutoff;
  j["coeffs"] = std::vector<double>(f.coeffs.data(), f.coeffs.data() + f.coeffs.size());
  return j;
}

inline FormField formfield_from_json(const nlohmann::json& j) {
  FormField f;
  f.degree = j.at("degree").get<int>();
  f.cutoff = j.at("cutoff").get<int>();
  const auto c = j.at("coeffs").get<std::vector<double>>();
  f.coeffs = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
  return f;
}

}  // namespace yano
