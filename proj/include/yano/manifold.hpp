#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace yano {

enum class ManifoldKind { FlatTorus, ConformalSphere };

// One real spherical-harmonic term of the conformal exponent.
struct SphTerm {
  int l = 0;
  int m = 0;
  double amp = 0.0;
};

// Declarative description of a supported manifold: a flat torus T^n
// (n = 2..4, rectangular periods) or a 2-sphere with metric e^{2f} g_round,
// f a finite real spherical-harmonic expansion.
struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::FlatTorus;
  int dims = 2;
  std::vector<double> periods;       // torus only, one per axis
  std::vector<SphTerm> conformal_coeffs;  // sphere only; empty = round

  static ManifoldSpec flat_torus(int n, std::vector<double> periods_) {
    ManifoldSpec s;
    s.kind = ManifoldKind::FlatTorus;
    s.dims = n;
    s.periods = std::move(periods_);
    s.validate();
    return s;
  }

  static ManifoldSpec conformal_sphere(std::vector<SphTerm> coeffs = {}) {
    ManifoldSpec s;
    s.kind = ManifoldKind::ConformalSphere;
    s.dims = 2;
    s.conformal_coeffs = std::move(coeffs);
    s.validate();
    return s;
  }

  bool is_round_sphere() const {
    if (kind != ManifoldKind::ConformalSphere) return false;
    for (const auto& t : conformal_coeffs)
      if (t.amp != 0.0) return false;
    return true;
  }

  // Max spherical-harmonic degree appearing in the conformal exponent.
  int conformal_degree() const {
    int L = 0;
    for (const auto& t : conformal_coeffs)
      if (t.amp != 0.0) L = std::max(L, t.l);
    return L;
  }

  // Sectional curvature when constant: 0 on tori, 1 on the round unit sphere.
  std::optional<double> constant_curvature() const {
    if (kind == ManifoldKind::FlatTorus) return 0.0;
    if (is_round_sphere()) return 1.0;
    return std::nullopt;
  }

  void validate() const {
    if (kind == ManifoldKind::FlatTorus) {
      if (dims < 2 || dims > 4)
        throw std::invalid_argument("flat_torus: dims must be in 2..4");
      if (static_cast<int>(periods.size()) != dims)
        throw std::invalid_argument("flat_torus: need one period per axis");
      for (double p : periods)
        if (!(p > 0.0))
          throw std::invalid_argument("flat_torus: periods must be positive");
    } else {
      if (dims != 2)
        throw std::invalid_argument("conformal_sphere: dims is fixed at 2");
      if (!periods.empty())
        throw std::invalid_argument("conformal_sphere: periods not allowed");
      for (const auto& t : conformal_coeffs) {
        if (t.l < 0 || std::abs(t.m) > t.l)
          throw std::invalid_argument(
              "conformal_sphere: coefficients need 0 <= |m| <= l");
      }
    }
  }

  std::string name() const {
    if (kind == ManifoldKind::FlatTorus) return "T" + std::to_string(dims);
    return is_round_sphere() ? "S2" : "S2[conformal]";
  }
};

inline nlohmann::ordered_json to_json(const ManifoldSpec& s) {
  nlohmann::ordered_json j;
  if (s.kind == ManifoldKind::FlatTorus) {
    j["kind"] = "flat_torus";
    j["dims"] = s.dims;
    j["periods"] = s.periods;
  } else {
    j["kind"] = "conformal_sphere";
    auto arr = nlohmann::ordered_json::array();
    for (const auto& t : s.conformal_coeffs)
      arr.push_back({{"l", t.l}, {"m", t.m}, {"amp", t.amp}});
    j["conformal_coeffs"] = arr;
  }
  return j;
}

inline ManifoldSpec manifold_from_json(const nlohmann::json& j) {
  ManifoldSpec s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "flat_torus") {
    s.kind = ManifoldKind::FlatTorus;
    s.dims = j.at("dims").get<int>();
    s.periods = j.at("periods").get<std::vector<double>>();
  } else if (kind == "conformal_sphere") {
    s.kind = ManifoldKind::ConformalSphere;
    s.dims = 2;
    if (j.contains("conformal_coeffs")) {
      for (const auto& e : j.at("conformal_coeffs")) {
        SphTerm t;
        t.l = e.at("l").get<int>();
        t.m = e.at("m").get<int>();
        t.amp = e.at("amp").get<double>();
        s.conformal_coeffs.push_back(t);
      }
    }
  } else {
    throw std::invalid_argument("manifold: unknown kind '" + kind + "'");
  }
  s.validate();
  return s;
}

inline ManifoldSpec load_manifold(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("manifold: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return manifold_from_json(j);
}

}  // namespace yano
