#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "yano/manifold.hpp"
#include "yano/sphharm.hpp"

// Quadrature grids with per-node frame data. All tensor components downstream
// live in an orthonormal frame of the *current* metric: the Cartesian frame on
// tori, and e^{-f}(e_theta, e_phi/sin theta) on the conformal sphere. The
// conformal factor is folded into the frame, the connection coefficients and
// the weights, so inner products are plain component sums everywhere.

namespace yano {

struct QuadratureGrid {
  ManifoldKind kind = ManifoldKind::FlatTorus;
  int n = 0;
  int resolution = 0;
  Eigen::MatrixXd nodes;        // N x n coordinates
  Eigen::VectorXd weights;      // volume measure of the current metric
  Eigen::MatrixXd frame_scale;  // N x n diagonal coframe coefficients
  Eigen::MatrixXd gamma;        // N x n^3, Gamma^c_{ab} at a*n*n + b*n + c
  Eigen::VectorXd curvature;    // Gaussian curvature (0 on tori)
  Eigen::VectorXd conf_f;       // conformal exponent f at nodes (0 on tori)
  Eigen::MatrixXd conf_df;      // N x n, background-frame derivatives of f

  int node_count() const { return static_cast<int>(nodes.rows()); }
};

// Frame connection coefficients Gamma^c_{ab} = <nabla_{e_a} e_b, e_c> at one
// point, flattened as [a*n*n + b*n + c]. Metric compatibility shows up as
// antisymmetry in (b, c).
inline std::vector<double> connection_at(const ManifoldSpec& spec,
                                         const Eigen::VectorXd& node) {
  spec.validate();
  const int n = spec.dims;
  std::vector<double> g(static_cast<size_t>(n) * n * n, 0.0);
  if (spec.kind == ManifoldKind::FlatTorus) return g;

  const double theta = node(0), phi = node(1);
  if (!(theta > 0.0 && theta < M_PI))
    throw std::invalid_argument("connection_at: node at a coordinate singularity");
  const double cot = std::cos(theta) / std::sin(theta);
  // Round frame (e_theta, e_phi/sin theta): nabla_{e2} e1 = cot e2,
  // nabla_{e2} e2 = -cot e1.
  auto at = [&](int a, int b, int c) -> double& { return g[(a * 2 + b) * 2 + c]; };
  at(1, 0, 1) = cot;
  at(1, 1, 0) = -cot;

  const SphExpansion f{spec.conformal_coeffs};
  if (!f.zero()) {
    const auto fj = f.jet(theta, phi);
    const double fb[2] = {fj.dt, fj.dp / std::sin(theta)};  // e_b(f), background
    const double ef = std::exp(-fj.val);
    std::vector<double> out(g.size(), 0.0);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          double v = g[(a * 2 + b) * 2 + c];
          if (a == c) v += fb[b];
          if (a == b) v -= fb[c];
          out[(a * 2 + b) * 2 + c] = ef * v;
        }
    return out;
  }
  return g;
}

// Gaussian curvature: 0 on tori, e^{-2f}(1 - lap_round f) on the sphere.
inline double curvature_at(const ManifoldSpec& spec, const Eigen::VectorXd& node) {
  if (spec.kind == ManifoldKind::FlatTorus) return 0.0;
  const double theta = node(0), phi = node(1);
  if (!(theta > 0.0 && theta < M_PI))
    throw std::invalid_argument("curvature_at: node at a coordinate singularity");
  const SphExpansion f{spec.conformal_coeffs};
  if (f.zero()) return 1.0;
  const double fv = f.jet(theta, phi).val;
  return std::exp(-2.0 * fv) * (1.0 - f.laplacian_round(theta, phi));
}

inline QuadratureGrid build_grid(const ManifoldSpec& spec, int resolution) {
  spec.validate();
  if (resolution < 2)
    throw std::invalid_argument("build_grid: resolution must be >= 2");
  QuadratureGrid grid;
  grid.kind = spec.kind;
  grid.n = spec.dims;
  grid.resolution = resolution;

  if (spec.kind == ManifoldKind::FlatTorus) {
    const int n = spec.dims;
    const int m = resolution;
    int N = 1;
    for (int i = 0; i < n; ++i) N *= m;
    double w = 1.0;
    for (int i = 0; i < n; ++i) w *= spec.periods[i] / m;
    grid.nodes.resize(N, n);
    grid.weights = Eigen::VectorXd::Constant(N, w);
    grid.frame_scale = Eigen::MatrixXd::Ones(N, n);
    grid.gamma = Eigen::MatrixXd::Zero(N, n * n * n);
    grid.curvature = Eigen::VectorXd::Zero(N);
    grid.conf_f = Eigen::VectorXd::Zero(N);
    grid.conf_df = Eigen::MatrixXd::Zero(N, n);
    std::vector<int> idx(n, 0);
    for (int row = 0; row < N; ++row) {
      for (int i = 0; i < n; ++i)
        grid.nodes(row, i) = spec.periods[i] * idx[i] / m;
      for (int i = n - 1; i >= 0; --i) {
        if (++idx[i] < m) break;
        idx[i] = 0;
      }
    }
    return grid;
  }

  // Sphere: Gauss-Legendre in cos(theta) x uniform phi.
  const int nt = resolution;
  const int np = 2 * resolution;
  const auto gl = gauss_legendre(nt);
  const SphExpansion f{spec.conformal_coeffs};
  const int N = nt * np;
  grid.nodes.resize(N, 2);
  grid.weights.resize(N);
  grid.frame_scale.resize(N, 2);
  grid.gamma.resize(N, 8);
  grid.curvature.resize(N);
  grid.conf_f.resize(N);
  grid.conf_df.resize(N, 2);
  const double wphi = 2.0 * M_PI / np;
  for (int i = 0; i < nt; ++i) {
    const double theta = std::acos(gl.x[nt - 1 - i]);  // ascending theta
    const double s = std::sin(theta);
    for (int k = 0; k < np; ++k) {
      const int row = i * np + k;
      const double phi = wphi * k;
      grid.nodes(row, 0) = theta;
      grid.nodes(row, 1) = phi;
      const auto fj = f.jet(theta, phi);
      grid.weights(row) = gl.w[nt - 1 - i] * wphi * std::exp(2.0 * fj.val);
      grid.frame_scale(row, 0) = std::exp(fj.val);
      grid.frame_scale(row, 1) = std::exp(fj.val) * s;
      grid.conf_f(row) = fj.val;
      grid.conf_df(row, 0) = fj.dt;
      grid.conf_df(row, 1) = fj.dp / s;
      const auto gm = connection_at(spec, grid.nodes.row(row).transpose());
      for (int q = 0; q < 8; ++q) grid.gamma(row, q) = gm[q];
      grid.curvature(row) = curvature_at(spec, grid.nodes.row(row).transpose());
    }
  }
  return grid;
}

// Smallest grid resolution that integrates Gram matrices of a basis at the
// given cutoff exactly (tori) or to spectral accuracy (sphere).
inline int min_resolution(const ManifoldSpec& spec, int cutoff) {
  if (spec.kind == ManifoldKind::FlatTorus) return 2 * cutoff + 1;
  const int extra = spec.is_round_sphere() ? 0 : 2 * spec.conformal_degree();
  return cutoff + 2 + extra;
}

}  // namespace yano
