#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "yano/operators.hpp"

// The four invariants b_r, t_r, k_r, p_r plus the parallel number c_r, and
// every theorem-level check: dimension bounds, Hodge-duality of the numbers,
// the kernel decomposition at b_r = 0, the constant-curvature integral
// identities, the classification lattice and the wedge lower bound.

namespace yano {

struct NumberResult {
  int value = 0;
  SpectrumResult spectrum;
};

inline NumberResult betti(const QuadraticForms& qf, const TolerancePolicy& p = {}) {
  const auto sr = kernel_dim(qf.Qd + qf.Qdelta, qf.M, p);
  return {sr.kernel_dim, sr};
}
inline NumberResult tachibana(const QuadraticForms& qf, const TolerancePolicy& p = {}) {
  const auto sr = kernel_dim(qf.Q3, qf.M, p);
  return {sr.kernel_dim, sr};
}
inline NumberResult killing(const QuadraticForms& qf, const TolerancePolicy& p = {}) {
  const auto sr = kernel_dim(qf.Q3 + qf.Qdelta, qf.M, p);
  return {sr.kernel_dim, sr};
}
inline NumberResult planarity(const QuadraticForms& qf, const TolerancePolicy& p = {}) {
  const auto sr = kernel_dim(qf.Q3 + qf.Qd, qf.M, p);
  return {sr.kernel_dim, sr};
}
inline NumberResult parallel_number(const QuadraticForms& qf, const TolerancePolicy& p = {}) {
  const auto sr = kernel_dim(qf.QB, qf.M, p);
  return {sr.kernel_dim, sr};
}

namespace detail {
inline long long factorial(int n) {
  long long v = 1;
  for (int i = 2; i <= n; ++i) v *= i;
  return v;
}
}  // namespace detail

// t_r <= (n+2)! / ((r+1)! (n-r+1)!)
inline int bound_tachibana(int n, int r) {
  return static_cast<int>(detail::factorial(n + 2) /
                          (detail::factorial(r + 1) * detail::factorial(n - r + 1)));
}
// k_r <= (n+1)! / ((r+1)! (n-r)!)
inline int bound_killing(int n, int r) {
  return static_cast<int>(detail::factorial(n + 1) /
                          (detail::factorial(r + 1) * detail::factorial(n - r)));
}
// p_r <= (n+1)! / (r! (n-r+1)!)
inline int bound_planarity(int n, int r) {
  return static_cast<int>(detail::factorial(n + 1) /
                          (detail::factorial(r) * detail::factorial(n - r + 1)));
}

struct BoundsRecord {
  int t_bound = 0, k_bound = 0, p_bound = 0;
  bool t_ok = false, k_ok = false, p_ok = false;
  bool chain_ok = false;  // c <= min(k,p) <= max(k,p) <= t and b >= c
  bool flat_applicable = false;
  int flat_value = 0;  // n! / (r! (n-r)!)
  bool flat_ok = true;

  bool all_ok() const {
    return t_ok && k_ok && p_ok && chain_ok && (!flat_applicable || flat_ok);
  }
};

inline BoundsRecord check_bounds(const ManifoldSpec& spec, int r, int b, int t,
                                 int k, int p, int c) {
  const int n = spec.dims;
  BoundsRecord rec;
  rec.t_bound = bound_tachibana(n, r);
  rec.k_bound = bound_killing(n, r);
  rec.p_bound = bound_planarity(n, r);
  rec.t_ok = t <= rec.t_bound;
  rec.k_ok = k <= rec.k_bound;
  rec.p_ok = p <= rec.p_bound;
  rec.chain_ok = c <= std::min(k, p) && std::max(k, p) <= t && b >= c;
  if (spec.kind == ManifoldKind::FlatTorus) {
    rec.flat_applicable = true;
    rec.flat_value = binomial(n, r);
    rec.flat_ok = t == rec.flat_value;
  }
  return rec;
}

struct DecompositionRecord {
  bool applicable = false;  // b_r = 0
  bool holds = false;       // t = p + k (asserted only when applicable)
  int t = 0, k = 0, p = 0;
  double orthogonality_defect = 0.0;
  int observed_gap = 0;  // t - (p + k), recorded either way
};

// Kernel decomposition t = p + k, asserted when b_r vanishes. The
// orthogonality defect is the largest M-inner product between M-normalized
// Killing-kernel and planarity-kernel vectors; the two subspaces are
// orthogonal inside the conformal-Killing kernel.
inline DecompositionRecord check_decomposition(const QuadraticForms& qf,
                                               const NumberResult& b,
                                               const NumberResult& t,
                                               const NumberResult& k,
                                               const NumberResult& p,
                                               const TolerancePolicy& policy = {}) {
  DecompositionRecord rec;
  rec.t = t.value;
  rec.k = k.value;
  rec.p = p.value;
  rec.observed_gap = t.value - k.value - p.value;
  const bool certifying = b.spectrum.clean() && t.spectrum.clean() &&
                          k.spectrum.clean() && p.spectrum.clean();
  rec.applicable = certifying && b.value == 0;
  if (rec.applicable) {
    rec.holds = rec.observed_gap == 0;
    if (k.value > 0 && p.value > 0) {
      const Eigen::MatrixXd kb = kernel_basis(qf.Q3 + qf.Qdelta, qf.M, policy);
      const Eigen::MatrixXd pb = kernel_basis(qf.Q3 + qf.Qd, qf.M, policy);
      rec.orthogonality_defect =
          (kb.transpose() * qf.M * pb).cwiseAbs().maxCoeff();
    }
  }
  return rec;
}

struct IdentityRecord {
  bool applicable = false;  // constant-curvature manifolds only
  double curvature = 0.0;
  std::vector<double> kashiwada_residuals;  // one per conformal-Killing kernel form
  std::vector<double> harmonic_residuals;   // one per harmonic kernel form
  std::string note;
};

// Relative residual of the constant-curvature conformal-Killing identity
//   r/((n-r)(r+1)) <dw,dw> + 1/(n-r+1) <d*w,d*w> = (n-r) C <w,w>.
inline double kashiwada_identity(const QuadraticForms& qf,
                                 const Eigen::VectorXd& v, double C) {
  const int n = qf.spec.dims, r = qf.r;
  const double m = v.dot(qf.M * v);
  if (!(m > 0.0)) throw std::invalid_argument("kashiwada_identity: zero form");
  const double lhs = (r / double((n - r) * (r + 1))) * v.dot(qf.Qd * v) +
                     v.dot(qf.Qdelta * v) / (n - r + 1.0);
  const double rhs = (n - r) * C * m;
  return std::abs(lhs - rhs) / m;
}

// Relative residual of the harmonic-form identity
//   -<nabla w, nabla w> = (n-r) C <w,w>  (for C = 0: harmonic => parallel).
inline double harmonic_identity(const QuadraticForms& qf,
                                const Eigen::VectorXd& v, double C) {
  const int n = qf.spec.dims, r = qf.r;
  const double m = v.dot(qf.M * v);
  if (!(m > 0.0)) throw std::invalid_argument("harmonic_identity: zero form");
  return std::abs(v.dot(qf.QB * v) + (n - r) * C * m) / m;
}

struct ClassifyFlags {
  bool closed = false, coclosed = false, harmonic = false;
  bool conformal_killing = false, killing = false, closed_conformal_killing = false;
  bool parallel = false;
  // raw scale-normalized Rayleigh quotients, in the order
  // d, d*, hodge, ck, killing, closed-ck, bochner
  std::array<double, 7> quotients{};
};

// Normalization scales for the seven classification quotients.
struct ClassifyScales {
  double d = 1, del = 1, hodge = 1, ck = 1, killing = 1, closed_ck = 1, bochner = 1;
};

inline ClassifyScales classify_scales(const QuadraticForms& qf,
                                      const TolerancePolicy& p = {}) {
  ClassifyScales s;
  s.d = kernel_dim(qf.Qd, qf.M, p).scale;
  s.del = kernel_dim(qf.Qdelta, qf.M, p).scale;
  s.hodge = kernel_dim(qf.Qd + qf.Qdelta, qf.M, p).scale;
  s.ck = kernel_dim(qf.Q3, qf.M, p).scale;
  s.killing = kernel_dim(qf.Q3 + qf.Qdelta, qf.M, p).scale;
  s.closed_ck = kernel_dim(qf.Q3 + qf.Qd, qf.M, p).scale;
  s.bochner = kernel_dim(qf.QB, qf.M, p).scale;
  return s;
}

// Membership flags from scale-normalized Rayleigh quotients. The composite
// flags follow the kernel characterizations (Killing = conformal Killing and
// coclosed, etc.), so the classification lattice holds for arbitrary input.
inline ClassifyFlags classify(const QuadraticForms& qf, const ClassifyScales& s,
                              const Eigen::VectorXd& v, double tol) {
  const double m = v.dot(qf.M * v);
  if (!(m > 0.0)) throw std::invalid_argument("classify: zero form");
  auto quot = [&](const Eigen::MatrixXd& Q, double scale) {
    const double q = v.dot(Q * v) / m;
    return scale > 0 ? q / scale : 0.0;
  };
  ClassifyFlags f;
  f.quotients[0] = quot(qf.Qd, s.d);
  f.quotients[1] = quot(qf.Qdelta, s.del);
  f.quotients[2] = quot(qf.Qd + qf.Qdelta, s.hodge);
  f.quotients[3] = quot(qf.Q3, s.ck);
  f.quotients[4] = quot(qf.Q3 + qf.Qdelta, s.killing);
  f.quotients[5] = quot(qf.Q3 + qf.Qd, s.closed_ck);
  f.quotients[6] = quot(qf.QB, s.bochner);
  f.closed = f.quotients[0] < tol;
  f.coclosed = f.quotients[1] < tol;
  f.conformal_killing = f.quotients[3] < tol;
  f.harmonic = f.closed && f.coclosed;
  f.killing = f.conformal_killing && f.coclosed;
  f.closed_conformal_killing = f.conformal_killing && f.closed;
  f.parallel = f.quotients[6] < tol && f.killing && f.closed_conformal_killing;
  return f;
}

struct ClassifiedForm {
  std::string kernel;  // which kernel the form came from
  int index = 0;
  ClassifyFlags flags;
};

struct DualityRecord {
  int paired_r = 0;
  bool t_match = false;
  bool pk_match = false;
  double star_residual = 0.0;
};

struct InvariantReport {
  ManifoldSpec spec;
  int r = 0, cutoff = 0, resolution = 0;
  TolerancePolicy policy;
  NumberResult b, t, k, p, c;
  BoundsRecord bounds;
  DecompositionRecord decomposition;
  IdentityRecord identity;
  std::vector<ClassifiedForm> classification;
  std::optional<DualityRecord> duality;
  bool certifying = false;

  bool all_checks_ok() const {
    bool ok = certifying && bounds.all_ok();
    if (decomposition.applicable) ok = ok && decomposition.holds;
    if (duality) ok = ok && duality->t_match && duality->pk_match;
    return ok;
  }
};

inline InvariantReport compute_invariants(const ManifoldSpec& spec,
                                          const QuadratureGrid& grid,
                                          const FormBasis& basis,
                                          const QuadraticForms& qf,
                                          const TolerancePolicy& policy = {}) {
  InvariantReport rep;
  rep.spec = spec;
  rep.r = basis.r;
  rep.cutoff = basis.cutoff;
  rep.resolution = grid.resolution;
  rep.policy = policy;
  rep.b = betti(qf, policy);
  rep.t = tachibana(qf, policy);
  rep.k = killing(qf, policy);
  rep.p = planarity(qf, policy);
  rep.c = parallel_number(qf, policy);
  rep.certifying = rep.b.spectrum.clean() && rep.t.spectrum.clean() &&
                   rep.k.spectrum.clean() && rep.p.spectrum.clean() &&
                   rep.c.spectrum.clean();
  rep.bounds = check_bounds(spec, rep.r, rep.b.value, rep.t.value, rep.k.value,
                            rep.p.value, rep.c.value);

  rep.decomposition =
      check_decomposition(qf, rep.b, rep.t, rep.k, rep.p, policy);

  const auto C = spec.constant_curvature();
  rep.identity.applicable = rep.certifying && C.has_value();
  if (rep.identity.applicable) {
    rep.identity.curvature = *C;
    if (rep.t.value > 0) {
      const Eigen::MatrixXd tb = kernel_basis(qf.Q3, qf.M, policy);
      for (int i = 0; i < tb.cols(); ++i)
        rep.identity.kashiwada_residuals.push_back(
            kashiwada_identity(qf, tb.col(i), *C));
    }
    if (rep.b.value > 0) {
      const Eigen::MatrixXd hb = kernel_basis(qf.Qd + qf.Qdelta, qf.M, policy);
      for (int i = 0; i < hb.cols(); ++i)
        rep.identity.harmonic_residuals.push_back(
            harmonic_identity(qf, hb.col(i), *C));
    }
  } else if (!C.has_value()) {
    rep.identity.note = "identity checks require constant curvature";
  }

  if (rep.certifying) {
    const auto scales = classify_scales(qf, policy);
    auto classify_kernel = [&](const char* label, const Eigen::MatrixXd& Q) {
      const Eigen::MatrixXd kb = kernel_basis(Q, qf.M, policy);
      for (int i = 0; i < kb.cols(); ++i) {
        ClassifiedForm cf;
        cf.kernel = label;
        cf.index = i;
        cf.flags = classify(qf, scales, kb.col(i), policy.classify_tol);
        rep.classification.push_back(std::move(cf));
      }
    };
    if (rep.t.value > 0) classify_kernel("tachibana", qf.Q3);
    if (rep.k.value > 0)
      classify_kernel("killing", Eigen::MatrixXd(qf.Q3 + qf.Qdelta));
    if (rep.p.value > 0)
      classify_kernel("planarity", Eigen::MatrixXd(qf.Q3 + qf.Qd));
  }
  return rep;
}

// Duality of the numbers between degrees r and n-r, plus the star residual:
// each degree-r conformal-Killing kernel form is pushed through the Hodge
// star and must again lie in the degree-(n-r) kernel.
inline DualityRecord check_duality(const InvariantReport& rep_r,
                                   const FormBasis& basis_r,
                                   const QuadraticForms& qf_r,
                                   const InvariantReport& rep_nr,
                                   const FormBasis& basis_nr,
                                   const QuadraticForms& qf_nr,
                                   const QuadratureGrid& grid,
                                   const TolerancePolicy& policy = {}) {
  const int n = rep_r.spec.dims;
  if (rep_nr.r != n - rep_r.r)
    throw std::invalid_argument("check_duality: degrees are not dual");
  if (rep_r.cutoff != rep_nr.cutoff)
    throw std::invalid_argument("check_duality: cutoff mismatch");
  DualityRecord rec;
  rec.paired_r = rep_nr.r;
  rec.t_match = rep_r.t.value == rep_nr.t.value;
  rec.pk_match = rep_r.p.value == rep_nr.k.value && rep_r.k.value == rep_nr.p.value;
  if (rep_r.t.value > 0 && rep_r.t.spectrum.clean()) {
    const Eigen::MatrixXd tb = kernel_basis(qf_r.Q3, qf_r.M, policy);
    const double scale = rep_nr.t.spectrum.scale;
    for (int i = 0; i < tb.cols(); ++i) {
      const FormField starred =
          hodge_star(grid, basis_r, basis_nr, basis_r.field(tb.col(i)));
      const double q = rayleigh(qf_nr.Q3, qf_nr.M, starred.coeffs) / scale;
      rec.star_residual = std::max(rec.star_residual, q);
    }
  }
  return rec;
}

struct WedgeBoundResult {
  int count = 0;
  double max_rayleigh_rel = 0.0;
  double min_gram_eigenvalue = 0.0;
  bool independent = false;
  bool all_conformal_killing = false;
};

// Wedge lower bound: wedges of h certified-parallel 1-forms give C(h, r)
// independent conformal Killing r-forms.
inline WedgeBoundResult wedge_lower_bound(
    const std::vector<FormField>& parallel_one_forms, int r,
    const FormBasis& basis_1, const QuadraticForms& qf_1,
    const FormBasis& basis_r, const QuadraticForms& qf_r,
    const QuadratureGrid& grid, const TolerancePolicy& policy = {}) {
  const int h = static_cast<int>(parallel_one_forms.size());
  if (r < 1 || r >= h)
    throw std::invalid_argument("wedge_lower_bound: need 1 <= r < h");
  const double s_qb = kernel_dim(qf_1.QB, qf_1.M, policy).scale;
  for (const auto& w : parallel_one_forms) {
    if (rayleigh(qf_1.QB, qf_1.M, w.coeffs) / s_qb > policy.classify_tol)
      throw std::invalid_argument(
          "wedge_lower_bound: input form is not parallel");
  }
  std::vector<FormValues> ones;
  for (const auto& w : parallel_one_forms)
    ones.push_back(eval_values(basis_1, w));

  WedgeBoundResult res;
  const double s_q3 = kernel_dim(qf_r.Q3, qf_r.M, policy).scale;
  std::vector<Eigen::VectorXd> coeffs;
  std::vector<int> pick(r);
  for (int i = 0; i < r; ++i) pick[i] = i;
  const int n = basis_r.n;
  while (true) {
    FormValues w = ones[pick[0]];
    for (int i = 1; i < r; ++i) w = wedge(n, w, ones[pick[i]]);
    const FormField proj = project(grid, basis_r, w);
    res.max_rayleigh_rel =
        std::max(res.max_rayleigh_rel,
                 rayleigh(qf_r.Q3, qf_r.M, proj.coeffs) / s_q3);
    coeffs.push_back(proj.coeffs);
    int i = r - 1;
    while (i >= 0 && pick[i] == h - r + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < r; ++j) pick[j] = pick[j - 1] + 1;
  }
  res.count = static_cast<int>(coeffs.size());
  Eigen::MatrixXd gram(res.count, res.count);
  for (int i = 0; i < res.count; ++i)
    for (int j = 0; j < res.count; ++j)
      gram(i, j) = coeffs[i].dot(qf_r.M * coeffs[j]) /
                   std::sqrt(coeffs[i].dot(qf_r.M * coeffs[i]) *
                             coeffs[j].dot(qf_r.M * coeffs[j]));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  res.min_gram_eigenvalue = es.eigenvalues().minCoeff();
  res.independent = res.min_gram_eigenvalue > 1e-6;
  res.all_conformal_killing = res.max_rayleigh_rel < policy.classify_tol;
  return res;
}

}  // namespace yano
