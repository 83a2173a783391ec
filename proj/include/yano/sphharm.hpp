#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "yano/manifold.hpp"

// Real spherical harmonics with analytic derivatives up to second order,
// and Gauss-Legendre quadrature rules. Everything here works away from the
// poles; grid nodes never touch them.

namespace yano {

struct GaussLegendre {
  std::vector<double> x;  // nodes in (-1, 1), ascending
  std::vector<double> w;
};

inline GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1");
  GaussLegendre gl;
  gl.x.resize(n);
  gl.w.resize(n);
  for (int k = 0; k < n; ++k) {
    // Newton from the Chebyshev-like initial guess; converges in ~5 steps.
    double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 64; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    gl.x[n - 1 - k] = x;  // ascending order
    gl.w[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return gl;
}

// Associated Legendre P_l^m(x) with first and second x-derivatives,
// m >= 0, |x| < 1. Forward recurrence in l for fixed m.
struct LegendreJet {
  double p = 0.0, dp = 0.0, d2p = 0.0;
};

inline LegendreJet assoc_legendre_jet(int l, int m, double x) {
  if (m < 0 || l < m) throw std::invalid_argument("assoc_legendre_jet: need 0 <= m <= l");
  const double s2 = 1.0 - x * x;
  if (s2 <= 0.0) throw std::invalid_argument("assoc_legendre_jet: |x| must be < 1");
  // P_m^m and P_{m+1}^m
  double pmm = 1.0;
  if (m > 0) {
    const double s = std::sqrt(s2);
    double fact = 1.0;
    for (int i = 1; i <= m; ++i) {
      pmm *= -fact * s;
      fact += 2.0;
    }
  }
  double p_prev = 0.0;  // P_{l-1}^m
  double p = pmm;       // running P_l^m
  if (l > m) {
    double p0 = pmm;
    double p1 = x * (2 * m + 1) * pmm;
    for (int j = m + 2; j <= l; ++j) {
      const double p2 = ((2 * j - 1) * x * p1 - (j + m - 1) * p0) / (j - m);
      p0 = p1;
      p1 = p2;
    }
    p = p1;
    p_prev = p0;
  }
  LegendreJet out;
  out.p = p;
  // (1-x^2) P' = (l+m) P_{l-1} - l x P_l
  out.dp = ((l + m) * p_prev - l * x * p) / s2;
  // Legendre ODE: (1-x^2) P'' = 2x P' - [l(l+1) - m^2/(1-x^2)] P
  out.d2p = (2.0 * x * out.dp - (l * (l + 1.0) - m * m / s2) * p) / s2;
  return out;
}

// Value and theta/phi derivatives (to second order) of a scalar on S^2.
struct ScalarJet {
  double val = 0.0;
  double dt = 0.0, dp = 0.0;
  double dtt = 0.0, dtp = 0.0, dpp = 0.0;
};

// Real orthonormal spherical harmonic:
//   m = 0 : N_{l0} P_l(cos t)
//   m > 0 : sqrt(2) N_{lm} P_l^m(cos t) cos(m p)
//   m < 0 : sqrt(2) N_{l|m|} P_l^{|m|}(cos t) sin(|m| p)
inline ScalarJet real_ylm_jet(int l, int m, double theta, double phi) {
  const int ma = std::abs(m);
  if (l < 0 || ma > l) throw std::invalid_argument("real_ylm_jet: need |m| <= l");
  double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI));
  for (int i = l - ma + 1; i <= l + ma; ++i) norm /= std::sqrt(static_cast<double>(i));
  if (m != 0) norm *= std::sqrt(2.0);

  const double x = std::cos(theta), s = std::sin(theta);
  const auto leg = assoc_legendre_jet(l, ma, x);
  // theta-dependence T(theta) = P(cos theta)
  const double T = leg.p;
  const double Tt = -s * leg.dp;
  const double Ttt = -x * leg.dp + s * s * leg.d2p;

  double A = 1.0, Ap = 0.0, App = 0.0;  // azimuthal factor and derivatives
  if (m > 0) {
    A = std::cos(ma * phi);
    Ap = -ma * std::sin(ma * phi);
    App = -ma * ma * A;
  } else if (m < 0) {
    A = std::sin(ma * phi);
    Ap = ma * std::cos(ma * phi);
    App = -ma * ma * A;
  }

  ScalarJet j;
  j.val = norm * T * A;
  j.dt = norm * Tt * A;
  j.dp = norm * T * Ap;
  j.dtt = norm * Ttt * A;
  j.dtp = norm * Tt * Ap;
  j.dpp = norm * T * App;
  return j;
}

// Finite real spherical-harmonic expansion (the conformal exponent f).
struct SphExpansion {
  std::vector<SphTerm> terms;

  bool zero() const {
    for (const auto& t : terms)
      if (t.amp != 0.0) return false;
    return true;
  }

  ScalarJet jet(double theta, double phi) const {
    ScalarJet acc;
    for (const auto& t : terms) {
      if (t.amp == 0.0) continue;
      const auto y = real_ylm_jet(t.l, t.m, theta, phi);
      acc.val += t.amp * y.val;
      acc.dt += t.amp * y.dt;
      acc.dp += t.amp * y.dp;
      acc.dtt += t.amp * y.dtt;
      acc.dtp += t.amp * y.dtp;
      acc.dpp += t.amp * y.dpp;
    }
    return acc;
  }

  // Laplace-Beltrami of f on the round sphere (div grad convention):
  // each Y_{lm} is an eigenfunction with eigenvalue -l(l+1).
  double laplacian_round(double theta, double phi) const {
    double acc = 0.0;
    for (const auto& t : terms) {
      if (t.amp == 0.0) continue;
      acc -= t.amp * t.l * (t.l + 1.0) * real_ylm_jet(t.l, t.m, theta, phi).val;
    }
    return acc;
  }
};

}  // namespace yano
