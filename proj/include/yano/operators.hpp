#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "yano/forms.hpp"

// Symmetric Gram matrices of the key quadratic forms, and generalized
// symmetric eigensolves with a gap-certified kernel-dimension policy.

namespace yano {

struct QuadraticForms {
  ManifoldSpec spec;
  int r = 0;
  int cutoff = 0;
  int resolution = 0;
  Eigen::MatrixXd M;       // mass
  Eigen::MatrixXd Qd;      // <d w, d w>
  Eigen::MatrixXd Qdelta;  // <d* w, d* w>
  Eigen::MatrixXd QB;      // <nabla w, nabla w> (Bochner energy)
  Eigen::MatrixXd Q3;      // <D3 w, D3 w> (conformal-Killing energy)
};

struct TolerancePolicy {
  double abs_tol = 1e-9;
  double gap_min = 1e3;
  double classify_tol = 1e-7;
};

enum class SpectrumStatus { clean, ambiguous };

struct SpectrumResult {
  std::vector<double> eigenvalues;  // ascending
  int kernel_dim = 0;
  double abs_tol_used = 0.0;  // absolute threshold actually applied
  double gap_ratio = 0.0;
  SpectrumStatus status = SpectrumStatus::clean;
  double scale = 0.0;  // mean of the top decile of eigenvalues

  bool clean() const { return status == SpectrumStatus::clean; }
};

namespace detail {

// Gram matrix A^T diag(w per node) A for row blocks of `per_node` rows.
inline Eigen::MatrixXd weighted_gram(const QuadratureGrid& grid,
                                     const Eigen::MatrixXd& a, int per_node) {
  Eigen::MatrixXd aw = a;
  for (int i = 0; i < grid.node_count(); ++i)
    aw.middleRows(static_cast<Eigen::Index>(i) * per_node, per_node) *=
        std::sqrt(grid.weights(i));
  return aw.transpose() * aw;
}

// Per-element pointwise operator arrays stacked for Gram assembly.
struct ElementArrays {
  Eigen::MatrixXd d;      // (N*C_{r+1}) x B
  Eigen::MatrixXd delta;  // (N*C_{r-1}) x B
  Eigen::MatrixXd d3;     // (N*n*C_r) x B
};

inline ElementArrays element_arrays(const FormBasis& basis) {
  const int n = basis.n, r = basis.r, N = basis.nodes, B = basis.size();
  const int C = basis.comps();
  const int Cd = binomial(n, r + 1);
  const int Cdel = binomial(n, r - 1);
  ElementArrays ea;
  ea.d.resize(static_cast<Eigen::Index>(N) * Cd, B);
  ea.delta.resize(static_cast<Eigen::Index>(N) * Cdel, B);
  ea.d3.resize(static_cast<Eigen::Index>(N) * n * C, B);
  for (int col = 0; col < B; ++col) {
    CovValues cov;
    cov.degree = r;
    Eigen::VectorXd flat = basis.derivs.col(col);
    cov.vals = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(flat.data(), N, n * C);
    const FormValues d = exterior_d(n, cov);
    const FormValues del = codifferential(n, cov);
    const CovValues d3 = ck_remainder(n, cov);
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < Cd; ++j)
        ea.d(static_cast<Eigen::Index>(i) * Cd + j, col) = d.vals(i, j);
      for (int j = 0; j < Cdel; ++j)
        ea.delta(static_cast<Eigen::Index>(i) * Cdel + j, col) = del.vals(i, j);
      for (int j = 0; j < n * C; ++j)
        ea.d3(static_cast<Eigen::Index>(i) * n * C + j, col) = d3.vals(i, j);
    }
  }
  return ea;
}

}  // namespace detail

// Assemble all five Gram matrices by quadrature of pointwise contractions.
// Q3 is assembled independently from the D3 arrays and cross-checked against
// QB - (1/(r+1))Qd - (1/(n-r+1))Qdelta, which holds exactly for the
// (1/r!) component-sum inner product; a mismatch means a convention bug or
// an under-resolved quadrature, and is rejected.
inline QuadraticForms assemble(const ManifoldSpec& spec,
                               const QuadratureGrid& grid,
                               const FormBasis& basis) {
  const int n = basis.n, r = basis.r;
  QuadraticForms qf;
  qf.spec = spec;
  qf.r = r;
  qf.cutoff = basis.cutoff;
  qf.resolution = grid.resolution;
  qf.M = basis.mass;

  const auto ea = detail::element_arrays(basis);
  qf.Qd = detail::weighted_gram(grid, ea.d, binomial(n, r + 1));
  qf.Qdelta = detail::weighted_gram(grid, ea.delta, binomial(n, r - 1));
  qf.QB = detail::weighted_gram(grid, basis.derivs, n * basis.comps());
  qf.Q3 = detail::weighted_gram(grid, ea.d3, n * basis.comps());

  const Eigen::MatrixXd combo =
      qf.QB - qf.Qd / (r + 1.0) - qf.Qdelta / (n - r + 1.0);
  const double scale = std::max(1.0, qf.QB.cwiseAbs().maxCoeff());
  const double defect = (qf.Q3 - combo).cwiseAbs().maxCoeff() / scale;
  if (defect > 1e-10)
    throw std::runtime_error(
        "assemble: energy decomposition defect " + std::to_string(defect) +
        " exceeds 1e-10; quadrature under-resolved");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esB(qf.QB,
                                                     Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es3(qf.Q3,
                                                     Eigen::EigenvaluesOnly);
  const double qb_norm = esB.eigenvalues().cwiseAbs().maxCoeff();
  if (es3.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, qb_norm))
    throw std::runtime_error(
        "assemble: conformal-Killing energy is not positive semidefinite");

  if (qf.M.llt().info() != Eigen::Success)
    throw std::runtime_error("assemble: mass matrix is not positive definite");
  return qf;
}

// Solve Q v = lambda M v (Cholesky reduction to a dense symmetric problem)
// and certify the kernel dimension: eigenvalues below abs_tol * scale count
// as kernel, and the count is only `clean` when a gap_min spectral gap
// separates them from the rest.
inline SpectrumResult kernel_dim(const Eigen::MatrixXd& Q,
                                 const Eigen::MatrixXd& M,
                                 const TolerancePolicy& policy = {}) {
  if (Q.rows() != Q.cols() || M.rows() != M.cols() || Q.rows() != M.rows())
    throw std::invalid_argument("kernel_dim: dimension mismatch");
  if (M.llt().info() != Eigen::Success)
    throw std::invalid_argument("kernel_dim: mass matrix not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Q, M,
                                                                Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success)
    throw std::runtime_error("kernel_dim: eigensolver failed to converge");
  const Eigen::VectorXd& ev = ges.eigenvalues();
  const int B = static_cast<int>(ev.size());

  SpectrumResult sr;
  sr.eigenvalues.assign(ev.data(), ev.data() + B);
  const int top = std::max(1, B / 10);
  sr.scale = ev.tail(top).mean();
  constexpr double floor_ev = 1e-300;
  if (sr.scale < 1e-250) {
    // identically-zero form: everything is kernel
    sr.kernel_dim = B;
    sr.abs_tol_used = policy.abs_tol * sr.scale;
    sr.gap_ratio = std::numeric_limits<double>::infinity();
    sr.status = SpectrumStatus::clean;
    return sr;
  }
  sr.abs_tol_used = policy.abs_tol * sr.scale;
  int k = 0;
  while (k < B && ev(k) < sr.abs_tol_used) ++k;
  sr.kernel_dim = k;
  if (k == B) {
    sr.gap_ratio = std::numeric_limits<double>::infinity();
  } else {
    const double below = k > 0 ? std::max(ev(k - 1), floor_ev) : floor_ev;
    sr.gap_ratio = ev(k) / below;
  }
  sr.status = sr.gap_ratio >= policy.gap_min ? SpectrumStatus::clean
                                             : SpectrumStatus::ambiguous;
  return sr;
}

// M-orthonormal kernel eigenvectors; refuses ambiguous spectra.
inline Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& Q,
                                    const Eigen::MatrixXd& M,
                                    const TolerancePolicy& policy = {}) {
  const SpectrumResult sr = kernel_dim(Q, M, policy);
  if (!sr.clean())
    throw std::runtime_error(
        "kernel_basis: ambiguous spectrum (gap_ratio " +
        std::to_string(sr.gap_ratio) +
        " below gap_min); raise the cutoff or resolution");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Q, M);
  return ges.eigenvectors().leftCols(sr.kernel_dim);
}

inline double rayleigh(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& M,
                       const Eigen::VectorXd& v) {
  const double den = v.dot(M * v);
  if (!(den > 0.0)) throw std::invalid_argument("rayleigh: zero vector");
  return v.dot(Q * v) / den;
}

}  // namespace yano
