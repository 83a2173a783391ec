#pragma once

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "yano/invariants.hpp"

// Versioned JSON persistence for invariant reports, and the aligned text
// table over several reports. Schema key: "yano_report_v1".

namespace yano {

namespace detail {

inline double finite_or_cap(double v) {
  // JSON has no infinity; an infinite gap ratio only occurs for an
  // identically-zero form, cap it at the largest double.
  if (std::isinf(v)) return std::numeric_limits<double>::max();
  return v;
}

inline nlohmann::ordered_json to_json(const SpectrumResult& sr) {
  nlohmann::ordered_json j;
  j["kernel_dim"] = sr.kernel_dim;
  j["abs_tol_used"] = sr.abs_tol_used;
  j["gap_ratio"] = finite_or_cap(sr.gap_ratio);
  j["status"] = sr.clean() ? "clean" : "ambiguous";
  j["scale"] = sr.scale;
  j["eigenvalues"] = sr.eigenvalues;
  return j;
}

inline SpectrumResult spectrum_from_json(const nlohmann::json& j) {
  SpectrumResult sr;
  sr.kernel_dim = j.at("kernel_dim").get<int>();
  sr.abs_tol_used = j.at("abs_tol_used").get<double>();
  sr.gap_ratio = j.at("gap_ratio").get<double>();
  sr.status = j.at("status").get<std::string>() == "clean"
                  ? SpectrumStatus::clean
                  : SpectrumStatus::ambiguous;
  sr.scale = j.at("scale").get<double>();
  sr.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
  return sr;
}

inline nlohmann::ordered_json to_json(const NumberResult& nr) {
  nlohmann::ordered_json j;
  j["value"] = nr.value;
  j["spectrum"] = to_json(nr.spectrum);
  return j;
}

inline NumberResult number_from_json(const nlohmann::json& j) {
  NumberResult nr;
  nr.value = j.at("value").get<int>();
  nr.spectrum = spectrum_from_json(j.at("spectrum"));
  return nr;
}

inline nlohmann::ordered_json to_json(const ClassifyFlags& f) {
  nlohmann::ordered_json j;
  j["closed"] = f.closed;
  j["coclosed"] = f.coclosed;
  j["harmonic"] = f.harmonic;
  j["conformal_killing"] = f.conformal_killing;
  j["killing"] = f.killing;
  j["closed_conformal_killing"] = f.closed_conformal_killing;
  j["parallel"] = f.parallel;
  j["quotients"] = f.quotients;
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const InvariantReport& rep) {
  nlohmann::ordered_json body;
  body["manifold"] = to_json(rep.spec);
  body["r"] = rep.r;
  body["cutoff"] = rep.cutoff;
  body["resolution"] = rep.resolution;
  body["tol_policy"] = {{"abs_tol", rep.policy.abs_tol},
                        {"gap_min", rep.policy.gap_min},
                        {"classify_tol", rep.policy.classify_tol}};
  body["certifying"] = rep.certifying;
  nlohmann::ordered_json numbers;
  numbers["b_r"] = detail::to_json(rep.b);
  numbers["t_r"] = detail::to_json(rep.t);
  numbers["k_r"] = detail::to_json(rep.k);
  numbers["p_r"] = detail::to_json(rep.p);
  numbers["c_r"] = detail::to_json(rep.c);
  body["numbers"] = numbers;
  body["bounds_ok"] = {{"t_r", rep.bounds.t_ok},
                       {"k_r", rep.bounds.k_ok},
                       {"p_r", rep.bounds.p_ok},
                       {"chain", rep.bounds.chain_ok},
                       {"t_bound", rep.bounds.t_bound},
                       {"k_bound", rep.bounds.k_bound},
                       {"p_bound", rep.bounds.p_bound},
                       {"flat_applicable", rep.bounds.flat_applicable},
                       {"flat_value", rep.bounds.flat_value},
                       {"flat_ok", rep.bounds.flat_ok}};
  if (rep.duality) {
    body["duality"] = {{"paired_r", rep.duality->paired_r},
                       {"t_match", rep.duality->t_match},
                       {"pk_match", rep.duality->pk_match},
                       {"star_residual", rep.duality->star_residual}};
  } else {
    body["duality"] = nullptr;
  }
  body["decomposition"] = {
      {"applicable", rep.decomposition.applicable},
      {"holds", rep.decomposition.holds},
      {"t", rep.decomposition.t},
      {"k", rep.decomposition.k},
      {"p", rep.decomposition.p},
      {"orthogonality_defect", rep.decomposition.orthogonality_defect},
      {"observed_gap", rep.decomposition.observed_gap}};
  body["identity_residuals"] = {
      {"applicable", rep.identity.applicable},
      {"curvature", rep.identity.curvature},
      {"kashiwada", rep.identity.kashiwada_residuals},
      {"harmonic", rep.identity.harmonic_residuals},
      {"note", rep.identity.note}};
  auto cls = nlohmann::ordered_json::array();
  for (const auto& cf : rep.classification) {
    nlohmann::ordered_json e;
    e["kernel"] = cf.kernel;
    e["index"] = cf.index;
    e["flags"] = detail::to_json(cf.flags);
    cls.push_back(e);
  }
  body["classification"] = cls;

  nlohmann::ordered_json root;
  root["yano_report_v1"] = body;
  return root;
}

inline InvariantReport report_from_json(const nlohmann::json& root) {
  if (!root.contains("yano_report_v1"))
    throw std::invalid_argument("report: missing yano_report_v1 key");
  const auto& j = root.at("yano_report_v1");
  InvariantReport rep;
  rep.spec = manifold_from_json(j.at("manifold"));
  rep.r = j.at("r").get<int>();
  rep.cutoff = j.at("cutoff").get<int>();
  rep.resolution = j.at("resolution").get<int>();
  rep.policy.abs_tol = j.at("tol_policy").at("abs_tol").get<double>();
  rep.policy.gap_min = j.at("tol_policy").at("gap_min").get<double>();
  rep.policy.classify_tol = j.at("tol_policy").at("classify_tol").get<double>();
  rep.certifying = j.at("certifying").get<bool>();
  rep.b = detail::number_from_json(j.at("numbers").at("b_r"));
  rep.t = detail::number_from_json(j.at("numbers").at("t_r"));
  rep.k = detail::number_from_json(j.at("numbers").at("k_r"));
  rep.p = detail::number_from_json(j.at("numbers").at("p_r"));
  rep.c = detail::number_from_json(j.at("numbers").at("c_r"));
  const auto& bo = j.at("bounds_ok");
  rep.bounds.t_ok = bo.at("t_r").get<bool>();
  rep.bounds.k_ok = bo.at("k_r").get<bool>();
  rep.bounds.p_ok = bo.at("p_r").get<bool>();
  rep.bounds.chain_ok = bo.at("chain").get<bool>();
  rep.bounds.t_bound = bo.at("t_bound").get<int>();
  rep.bounds.k_bound = bo.at("k_bound").get<int>();
  rep.bounds.p_bound = bo.at("p_bound").get<int>();
  rep.bounds.flat_applicable = bo.at("flat_applicable").get<bool>();
  rep.bounds.flat_value = bo.at("flat_value").get<int>();
  rep.bounds.flat_ok = bo.at("flat_ok").get<bool>();
  if (!j.at("duality").is_null()) {
    DualityRecord d;
    d.paired_r = j.at("duality").at("paired_r").get<int>();
    d.t_match = j.at("duality").at("t_match").get<bool>();
    d.pk_match = j.at("duality").at("pk_match").get<bool>();
    d.star_residual = j.at("duality").at("star_residual").get<double>();
    rep.duality = d;
  }
  const auto& de = j.at("decomposition");
  rep.decomposition.applicable = de.at("applicable").get<bool>();
  rep.decomposition.holds = de.at("holds").get<bool>();
  rep.decomposition.t = de.at("t").get<int>();
  rep.decomposition.k = de.at("k").get<int>();
  rep.decomposition.p = de.at("p").get<int>();
  rep.decomposition.orthogonality_defect =
      de.at("orthogonality_defect").get<double>();
  rep.decomposition.observed_gap = de.at("observed_gap").get<int>();
  const auto& id = j.at("identity_residuals");
  rep.identity.applicable = id.at("applicable").get<bool>();
  rep.identity.curvature = id.at("curvature").get<double>();
  rep.identity.kashiwada_residuals =
      id.at("kashiwada").get<std::vector<double>>();
  rep.identity.harmonic_residuals =
      id.at("harmonic").get<std::vector<double>>();
  rep.identity.note = id.at("note").get<std::string>();
  return rep;
}

inline void save_report(const InvariantReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("report: cannot write " + path);
  out << report_to_json(rep).dump(2) << "\n";
}

inline InvariantReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("report: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return report_from_json(j);
}

// Aligned comparison table over several reports. Numbers from ambiguous
// spectra render as "?". Returns the text and whether every report certifies
// and passes its checks.
inline std::pair<std::string, bool> render_table(
    const std::vector<InvariantReport>& reports) {
  std::vector<std::array<std::string, 11>> rows;
  rows.push_back({"manifold", "r", "b_r", "t_r", "k_r", "p_r", "c_r", "bounds",
                  "decomp", "duality", "status"});
  bool all_ok = true;
  auto cell = [](const NumberResult& nr) {
    return nr.spectrum.clean() ? std::to_string(nr.value) : std::string("?");
  };
  for (const auto& rep : reports) {
    std::array<std::string, 11> row;
    row[0] = rep.spec.name();
    row[1] = std::to_string(rep.r);
    row[2] = cell(rep.b);
    row[3] = cell(rep.t);
    row[4] = cell(rep.k);
    row[5] = cell(rep.p);
    row[6] = cell(rep.c);
    row[7] = rep.bounds.all_ok() ? "ok" : "FAIL";
    row[8] = !rep.decomposition.applicable
                 ? "n/a"
                 : (rep.decomposition.holds ? "ok" : "FAIL");
    row[9] = !rep.duality ? "n/a"
             : (rep.duality->t_match && rep.duality->pk_match) ? "ok"
                                                               : "FAIL";
    row[10] = rep.certifying ? "clean" : "ambiguous";
    all_ok = all_ok && rep.all_checks_ok();
    rows.push_back(row);
  }
  std::array<size_t, 11> width{};
  for (const auto& row : rows)
    for (size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  std::ostringstream os;
  for (size_t ri = 0; ri < rows.size(); ++ri) {
    for (size_t c = 0; c < rows[ri].size(); ++c)
      os << std::left << std::setw(static_cast<int>(width[c]) + 2) << rows[ri][c];
    os << "\n";
    if (ri == 0) {
      for (size_t c = 0; c < width.size(); ++c)
        os << std::string(width[c], '-') << "  ";
      os << "\n";
    }
  }
  return {os.str(), all_ok};
}

}  // namespace yano
