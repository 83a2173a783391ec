// Command-line front end: invariants, spectrum, verify and table.
// Exit codes: 0 = all clean and all asserted checks pass, 1 = a check failed
// or a spectrum is ambiguous, 2 = configuration or I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "yano/yano.hpp"

namespace {

struct JobConfig {
  std::string manifold_path;
  std::vector<int> degrees;
  int cutoff = 0;
  int resolution = 0;
  yano::TolerancePolicy policy;
  std::string out_path;
};

struct DegreeData {
  yano::FormBasis basis;
  yano::QuadraticForms qf;
  yano::InvariantReport report;
};

std::string out_path_for_degree(const std::string& base, int r, bool multi) {
  if (!multi) return base;
  const auto dot = base.rfind('.');
  const std::string stem = dot == std::string::npos ? base : base.substr(0, dot);
  const std::string ext = dot == std::string::npos ? "" : base.substr(dot);
  return stem + "_r" + std::to_string(r) + ext;
}

int run_invariants(const JobConfig& cfg) {
  const auto spec = yano::load_manifold(cfg.manifold_path);
  for (int r : cfg.degrees)
    if (r < 1 || r > spec.dims - 1)
      throw std::invalid_argument("invariants: degree " + std::to_string(r) +
                                  " outside 1..n-1");
  const auto grid = yano::build_grid(spec, cfg.resolution);
  std::map<int, DegreeData> per_degree;
  for (int r : cfg.degrees) {
    DegreeData dd;
    dd.basis = yano::build_basis(spec, grid, r, cfg.cutoff);
    dd.qf = yano::assemble(spec, grid, dd.basis);
    dd.report = yano::compute_invariants(spec, grid, dd.basis, dd.qf, cfg.policy);
    per_degree.emplace(r, std::move(dd));
  }
  for (auto& [r, dd] : per_degree) {
    const int dual = spec.dims - r;
    const auto it = per_degree.find(dual);
    if (it != per_degree.end())
      dd.report.duality =
          yano::check_duality(dd.report, dd.basis, dd.qf, it->second.report,
                              it->second.basis, it->second.qf, grid, cfg.policy);
  }
  std::vector<yano::InvariantReport> reports;
  const bool multi = cfg.degrees.size() > 1;
  for (auto& [r, dd] : per_degree) {
    yano::save_report(dd.report, out_path_for_degree(cfg.out_path, r, multi));
    reports.push_back(dd.report);
  }
  const auto [text, ok] = yano::render_table(reports);
  std::cout << text;
  return ok ? 0 : 1;
}

int run_spectrum(const JobConfig& cfg, const std::string& which) {
  const auto spec = yano::load_manifold(cfg.manifold_path);
  if (cfg.degrees.size() != 1)
    throw std::invalid_argument("spectrum: exactly one --r is required");
  const int r = cfg.degrees[0];
  if (r < 1 || r > spec.dims - 1)
    throw std::invalid_argument("spectrum: degree outside 1..n-1");
  const auto grid = yano::build_grid(spec, cfg.resolution);
  const auto basis = yano::build_basis(spec, grid, r, cfg.cutoff);
  const auto qf = yano::assemble(spec, grid, basis);
  Eigen::MatrixXd Q;
  if (which == "hodge")
    Q = qf.Qd + qf.Qdelta;
  else if (which == "tachibana")
    Q = qf.Q3;
  else if (which == "bochner")
    Q = qf.QB;
  else if (which == "killing_sum")
    Q = qf.Q3 + qf.Qdelta;
  else if (which == "planarity_sum")
    Q = qf.Q3 + qf.Qd;
  else
    throw std::invalid_argument("spectrum: unknown selector '" + which + "'");
  const auto sr = yano::kernel_dim(Q, qf.M, cfg.policy);
  std::ostringstream os;
  os << "index,eigenvalue\n";
  char buf[64];
  for (size_t i = 0; i < sr.eigenvalues.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, sr.eigenvalues[i]);
    os << buf;
  }
  if (cfg.out_path.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream out(cfg.out_path);
    if (!out) throw std::invalid_argument("spectrum: cannot write " + cfg.out_path);
    out << os.str();
  }
  return 0;
}

struct VerifyRow {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool less_than = true;  // pass when value < threshold (else value == threshold)
  bool pass = false;
};

void add_row(std::vector<VerifyRow>& rows, const std::string& name, double value,
             double threshold, bool less_than = true) {
  VerifyRow row{name, value, threshold, less_than, false};
  row.pass = less_than ? value < threshold : value == threshold;
  rows.push_back(row);
}

int run_verify(const JobConfig& cfg) {
  const auto spec = yano::load_manifold(cfg.manifold_path);
  const int n = spec.dims;
  int cutoff = cfg.cutoff;
  int resolution = cfg.resolution;
  if (cutoff == 0) {
    if (spec.kind == yano::ManifoldKind::FlatTorus)
      cutoff = n == 4 ? 1 : 2;
    else
      cutoff = 8;
  }
  if (resolution == 0) resolution = yano::min_resolution(spec, cutoff) + (spec.kind == yano::ManifoldKind::ConformalSphere ? 2 * cutoff : 0);
  const auto grid = yano::build_grid(spec, resolution);
  const int fine_res = spec.kind == yano::ManifoldKind::FlatTorus
                           ? 2 * resolution + 1
                           : resolution + resolution / 2;
  const auto fine_grid = yano::build_grid(spec, fine_res);

  std::vector<VerifyRow> rows;
  if (spec.kind == yano::ManifoldKind::FlatTorus) {
    for (int r = 1; r <= n - 1; ++r) {
      const auto basis = yano::build_basis(spec, grid, r, cutoff);
      const auto fine_basis = yano::build_basis(spec, fine_grid, r, cutoff);
      const auto qf = yano::assemble(spec, grid, basis);
      const std::string tag = "r=" + std::to_string(r) + " ";
      const auto parallels = yano::torus_parallel_basis(n, r);
      double worst = 0.0;
      for (const auto& f : parallels)
        worst = std::max({worst, yano::residual_ck(f, grid),
                          yano::residual_killing(f, grid),
                          yano::residual_closed_ck(f, grid)});
      add_row(rows, tag + "parallel family defining residuals", worst, 1e-10);
      double worst_k = 0.0;
      for (const auto& f : yano::flat_killing_basis(n, r))
        worst_k = std::max(worst_k, yano::residual_killing(f, grid));
      add_row(rows, tag + "flat Killing family residual", worst_k, 1e-12);
      const auto cc = yano::cross_certify(parallels, grid, basis, fine_grid,
                                          fine_basis, qf.Q3, qf.M, cfg.policy);
      double defect = 0.0, ray = 0.0;
      for (const auto& e : cc.entries) {
        defect = std::max(defect, e.projection_defect);
        ray = std::max(ray, e.rayleigh_rel);
      }
      add_row(rows, tag + "parallel projection defect", defect, 1e-8);
      add_row(rows, tag + "parallel kernel Rayleigh", ray, 1e-8);
      const auto t = yano::tachibana(qf, cfg.policy);
      add_row(rows, tag + "span == t_r", cc.span_dim, t.value, false);
      const auto ccb = yano::cross_certify(parallels, grid, basis, fine_grid,
                                           fine_basis, qf.QB, qf.M, cfg.policy);
      const auto c = yano::parallel_number(qf, cfg.policy);
      add_row(rows, tag + "span == c_r", ccb.span_dim, c.value, false);
      // non-periodic chart-level members must be rejected by projection
      const auto killing_family = yano::flat_killing_basis(n, r);
      const auto ccl =
          yano::cross_certify(killing_family, grid, basis, fine_grid,
                              fine_basis, qf.Q3, qf.M, cfg.policy);
      double min_linear_defect = 1.0;
      for (const auto& e : ccl.entries)
        if (e.name.rfind("rotational", 0) == 0)
          min_linear_defect = std::min(min_linear_defect, e.projection_defect);
      add_row(rows, tag + "x-linear members rejected (defect > 0.1)",
              -min_linear_defect, -0.1);
    }
  } else {
    const auto basis = yano::build_basis(spec, grid, 1, cutoff);
    const auto fine_basis = yano::build_basis(spec, fine_grid, 1, cutoff);
    const auto qf = yano::assemble(spec, grid, basis);
    auto family = yano::sphere_ck_basis();
    const yano::SphExpansion f{spec.conformal_coeffs};
    if (!spec.is_round_sphere()) {
      for (auto& form : family) form = yano::conformal_scale(form, f, 2.0);
    }
    double worst_ck = 0.0;
    for (const auto& form : family)
      worst_ck = std::max(worst_ck, yano::residual_ck(form, grid));
    add_row(rows, "conformal-Killing residuals (6 forms)", worst_ck, 1e-10);
    if (spec.is_round_sphere()) {
      double worst_rot = 0.0, worst_grad = 0.0;
      for (const auto& form : family) {
        if (form.provenance == yano::Provenance::sphere_rotation)
          worst_rot = std::max(worst_rot, yano::residual_killing(form, grid));
        else
          worst_grad = std::max(worst_grad, yano::residual_closed_ck(form, grid));
      }
      add_row(rows, "rotation duals: Killing residual", worst_rot, 1e-10);
      add_row(rows, "gradients: closed-CK residual", worst_grad, 1e-10);
    }
    int killing_count = 0;
    for (const auto& form : family)
      if (yano::residual_killing(form, grid) < 1e-8) ++killing_count;
    const auto k = yano::killing(qf, cfg.policy);
    add_row(rows, "Killing residual count == k_1", killing_count, k.value, false);
    const auto cc = yano::cross_certify(family, grid, basis, fine_grid,
                                        fine_basis, qf.Q3, qf.M, cfg.policy);
    double defect = 0.0, ray = 0.0;
    for (const auto& e : cc.entries) {
      defect = std::max(defect, e.projection_defect);
      ray = std::max(ray, e.rayleigh_rel);
    }
    add_row(rows, "projection defect (6 forms)", defect, 1e-8);
    add_row(rows, "kernel Rayleigh (6 forms)", ray, 1e-8);
    const auto t = yano::tachibana(qf, cfg.policy);
    add_row(rows, "span == t_1", cc.span_dim, t.value, false);
    const auto b = yano::betti(qf, cfg.policy);
    add_row(rows, "b_1 == 0", b.value, 0, false);
  }

  size_t width = 0;
  for (const auto& row : rows) width = std::max(width, row.name.size());
  bool all = true;
  for (const auto& row : rows) {
    std::cout << std::left << std::setw(static_cast<int>(width) + 2) << row.name
              << (row.pass ? "PASS" : "FAIL");
    if (row.less_than)
      std::cout << "  (" << std::scientific << std::setprecision(3) << row.value
                << " vs " << row.threshold << ")";
    else
      std::cout << "  (" << static_cast<long long>(row.value) << " vs "
                << static_cast<long long>(row.threshold) << ")";
    std::cout << "\n";
    all = all && row.pass;
  }
  return all ? 0 : 1;
}

int run_table(const std::vector<std::string>& paths) {
  std::vector<yano::InvariantReport> reports;
  for (const auto& p : paths) reports.push_back(yano::load_report(p));
  const auto [text, ok] = yano::render_table(reports);
  std::cout << text;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral computation of Betti, Tachibana, Killing and "
               "planarity numbers on model manifolds"};
  app.require_subcommand(1);

  JobConfig cfg;
  std::string which = "hodge";
  std::vector<std::string> table_paths;

  auto add_common = [&](CLI::App* sub, bool need_sizes) {
    sub->add_option("--manifold", cfg.manifold_path, "manifold spec JSON path")
        ->required();
    sub->add_option("--r", cfg.degrees, "form degree (repeatable)");
    auto* co = sub->add_option("--cutoff", cfg.cutoff, "spectral cutoff");
    auto* re = sub->add_option("--resolution", cfg.resolution, "grid resolution");
    if (need_sizes) {
      co->required();
      re->required();
    }
    sub->add_option("--abs-tol", cfg.policy.abs_tol,
                    "kernel threshold relative to spectrum scale");
    sub->add_option("--gap-min", cfg.policy.gap_min,
                    "minimum spectral gap ratio for a clean kernel");
    sub->add_option("--out", cfg.out_path, "output path");
  };

  auto* inv = app.add_subcommand("invariants",
                                 "compute b, t, k, p, c and all checks");
  add_common(inv, true);

  auto* spec_cmd = app.add_subcommand("spectrum", "dump a full spectrum as CSV");
  add_common(spec_cmd, true);
  spec_cmd->add_option("--which", which,
                       "hodge|tachibana|bochner|killing_sum|planarity_sum");

  auto* ver = app.add_subcommand("verify", "run the analytic oracle suite");
  add_common(ver, false);

  auto* tab = app.add_subcommand("table", "render report JSONs as a table");
  tab->add_option("reports", table_paths, "report JSON paths")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (inv->parsed()) {
      if (cfg.degrees.empty())
        throw std::invalid_argument("invariants: at least one --r is required");
      if (cfg.out_path.empty()) cfg.out_path = "yano_report.json";
      return run_invariants(cfg);
    }
    if (spec_cmd->parsed()) return run_spectrum(cfg, which);
    if (ver->parsed()) return run_verify(cfg);
    if (tab->parsed()) return run_table(table_paths);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
