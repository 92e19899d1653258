// salab: batch driver for the selfadjoint-extension laboratory.
//
//   salab spectrum|flow|instability|certify|audit [--config run.json] [flags]
//
// Each run writes report.json, CSV tables and timing.json to <out-dir>/<utc-stamp>-<config-hash>/.
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 not certifiable.

#include <algorithm>
#include <chrono>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "run_config.hpp"
#include "run_output.hpp"
#include "salab/fd_oracle.hpp"

using namespace salab;
using namespace salab::cli;

namespace {

IntervalLaplacian make_model(const RunConfig& c) {
  return IntervalLaplacian(c.model == "full" ? BoundaryModel::Full : BoundaryModel::Pinned, c.quad_order);
}

void regularity(RunOutput& out, const SpectralData& sd) {
  const std::vector<double> s_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  try {
    const RegularitySplit rs = regularity_split(sd, s_grid);
    Table& t = out.table("regularity", {"direction", "weight", "s", "verdict"});
    for (std::size_t j = 0; j < rs.directions.size(); ++j) {
      const auto& p = rs.directions[j];
      for (const auto& [s, v] : p.verdicts) t.add({std::to_string(j), num(p.weight), num(s), to_string(v)});
    }
    out.results["regularity"] = {{"status", "ok"},
                                 {"truncation", sd.size()},
                                 {"d0_dim", rs.d0.cols()},
                                 {"d1_dim", rs.d1.cols()},
                                 {"d0_basis", jcomplex_matrix(rs.d0)},
                                 {"note", rs.note}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Inconclusive) throw;
    out.results["regularity"] = {{"status", "inconclusive"}, {"message", e.what()}};
  }
}

void cmd_spectrum(const RunConfig& c, RunOutput& out) {
  if (c.model == "synthetic") {
    RVec amps(c.synthetic.amps.size());
    for (std::size_t i = 0; i < c.synthetic.amps.size(); ++i) amps(i) = c.synthetic.amps[i];
    const auto syn = SyntheticRealization::power_law(c.synthetic.a, c.synthetic.p, amps, c.synthetic.q);
    const SpectralData sd = syn.data(std::max(c.count, c.truncation));
    std::vector<std::string> cols{"k", "lambda"};
    for (int j = 0; j < syn.complement_dim; ++j) {
      cols.push_back("c" + std::to_string(j) + "_re");
      cols.push_back("c" + std::to_string(j) + "_im");
    }
    Table& t = out.table("eigenvalues", cols);
    ojson ev = ojson::array();
    for (int k = 0; k < c.count; ++k) {
      std::vector<std::string> row{std::to_string(k + 1), num(sd.lambdas(k))};
      for (int j = 0; j < syn.complement_dim; ++j) {
        row.push_back(num(sd.rows(k, j).real()));
        row.push_back(num(sd.rows(k, j).imag()));
      }
      t.add(row);
      ev.push_back(sd.lambdas(k));
    }
    out.results["eigenvalues"] = ev;
    out.results["lower_bound"] = syn.lower_bound(c.count);
    if (c.truncation > 0) {
      regularity(out, sd);
      // F(lambda)^H = F(conj lambda) off the real axis
      const cplx z(-10.0, 1.0);
      const FMatrix a = f_matrix_series(sd, z, c.truncation, 1e300);
      const FMatrix b = f_matrix_series(sd, std::conj(z), c.truncation, 1e300);
      out.diagnostics["f_conjugation_residual"] = op_norm(a.matrix.adjoint() - b.matrix);
    }
    return;
  }

  const IntervalLaplacian model = make_model(c);
  const LagrangianDomain dom = parse_domain(model, c.domain);
  const EigenSystem es = model.eigen_system(dom, c.count);
  const SecularFunction sec(model, dom);
  std::optional<RVec> fd;
  if (c.oracle) fd = oracle_spectrum_fd(model, dom, c.oracle_n, es.size());

  std::vector<std::string> cols{"k", "lambda", "secular_residual", "psi0_re", "psi0_im", "dpsi0_re", "dpsi0_im"};
  if (fd) cols.insert(cols.end(), {"oracle_lambda", "oracle_abs_diff", "oracle_ok"});
  Table& t = out.table("eigenvalues", cols);
  ojson ev = ojson::array();
  double worst = 0.0;
  int oracle_fail = 0;
  for (int k = 0; k < es.size(); ++k) {
    const EigenPair& p = es.pairs[k];
    std::vector<std::string> row{std::to_string(k + 1), num(p.lambda), num(std::abs(sec.raw(p.lambda))),
                                 num(p.traces(0).real()), num(p.traces(0).imag()), num(p.traces(1).real()),
                                 num(p.traces(1).imag())};
    if (fd) {
      const double diff = std::abs((*fd)(k) - p.lambda);
      const bool ok = diff <= std::max(1e-3, 1e-3 * std::abs(p.lambda));
      worst = std::max(worst, diff);
      if (!ok) ++oracle_fail;
      row.insert(row.end(), {num((*fd)(k)), num(diff), ok ? "true" : "false"});
    }
    t.add(row);
    ev.push_back(p.lambda);
  }
  const double m = model.lower_bound();
  int below = 0, negative = 0;
  for (const auto& p : es.pairs) {
    if (p.lambda < m * (1.0 - 1e-9)) ++below;
    if (p.lambda < 0) ++negative;
  }
  const InstabilityVerdict iv = is_unstable(model, dom);
  out.results["eigenvalues"] = ev;
  out.results["lower_bound"] = m;
  out.results["d"] = model.half_dim();
  out.results["count_below_lower_bound"] = below;
  out.results["negative_count"] = negative;
  out.results["unstable"] = iv.unstable;
  out.results["domain_basis"] = jcomplex_matrix(dom.basis());
  if (fd) out.results["oracle"] = {{"n", c.oracle_n}, {"max_abs_diff", worst}, {"failures", oracle_fail}};
  out.diagnostics["isotropy_residual"] = dom.isotropy_residual();
  const auto& dg = model.space()->diagnostics();
  out.diagnostics["space"] = {{"almost_complex_residual", dg.almost_complex_residual},
                              {"isometry_residual", dg.isometry_residual},
                              {"green_skew_residual", dg.green_skew_residual},
                              {"green_min_singular", dg.green_min_singular}};
  if (c.truncation > 0) regularity(out, DomainSeries(model, dom, c.truncation).data());
}

void cmd_flow(const RunConfig& c, RunOutput& out) {
  const IntervalLaplacian model = make_model(c);
  const LagrangianDomain base = parse_domain(model, c.base);
  std::vector<double> grid = c.lambda_grid;
  std::sort(grid.begin(), grid.end(), std::greater<>());
  const auto pts = kernel_flow(model, base, grid);
  Table& t = out.table("flow", {"lambda", "gap", "ok", "route", "reason"});
  bool monotone = true;
  double prev = 2.0, last = std::nan("");
  int skipped = 0;
  for (const auto& p : pts) {
    t.add({num(p.lambda), p.ok ? num(p.gap) : "nan", p.ok ? "true" : "false", p.route, csv_text(p.reason)});
    if (!p.ok) {
      ++skipped;
      continue;
    }
    if (p.gap >= prev) monotone = false;
    prev = last = p.gap;
  }
  out.results["monotone_decreasing"] = monotone;
  out.results["final_gap"] = jnum(last);
  out.results["skipped"] = skipped;
  if (grid.back() <= -1e3) {
    const FriedrichsEstimate a = friedrichs_recover(model, grid.back(), base);
    const FriedrichsEstimate b = friedrichs_recover(model, grid.back());
    out.results["recovery"] = {{"lambda", grid.back()},
                               {"gap_to_declared", a.gap_to_declared},
                               {"selfadjoint_residual", a.selfadjoint_residual},
                               {"base_independence_gap", gap(a.domain, b.domain)},
                               {"domain_basis", jcomplex_matrix(a.domain.basis())}};
  }
}

void cmd_instability(const RunConfig& c, RunOutput& out) {
  const IntervalLaplacian model = make_model(c);
  const LagrangianDomain dom = parse_domain(model, c.domain);
  const InstabilityVerdict v = is_unstable(model, dom);
  out.results["verdict"] = v.unstable ? "unstable" : "stable";
  out.results["witness_dim"] = v.witness.dim();
  out.results["max_cosine"] = v.max_cosine;
  out.results["smallest_angle"] = v.smallest_angle;
  if (!v.unstable) return;

  const int n = static_cast<int>(c.lambda_grid.size());
  std::vector<std::optional<InstabilityCurvePoint>> pts(n);
  std::vector<std::string> reasons(n);
  std::vector<double> lowest(n, std::nan(""));
  parallel_for(n, [&](int i) {
    try {
      pts[i] = instability_curve(model, dom, c.lambda_grid[i]);
      lowest[i] = model.eigen_system(*pts[i]->domain, 1).pairs.front().lambda;
    } catch (const Error& e) {
      reasons[i] = e.what();
    }
  });
  Table& t = out.table("curve", {"lambda", "gap_to_base", "secular_residual", "hermitian_residual",
                                 "selfadjoint_residual", "kernel_intersection_dim", "t_norm", "lowest_eigenvalue",
                                 "accepted", "reason"});
  int accepted = 0;
  bool decreasing = true;
  double prev = 2.0;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return c.lambda_grid[a] > c.lambda_grid[b]; });
  for (int i : order) {
    if (!pts[i]) {
      t.add({num(c.lambda_grid[i]), "nan", "nan", "nan", "nan", "0", "nan", "nan", "false", csv_text(reasons[i])});
      continue;
    }
    const auto& p = *pts[i];
    const bool ok = p.selfadjoint_residual < 1e-8 && p.secular_residual < 1e-6 && p.hermitian_residual < 1e-8 &&
                    p.kernel_intersection_dim >= 1;
    if (ok) ++accepted;
    if (p.gap_to_base >= prev) decreasing = false;
    prev = p.gap_to_base;
    t.add({num(p.lambda), num(p.gap_to_base), num(p.secular_residual), num(p.hermitian_residual),
           num(p.selfadjoint_residual), std::to_string(p.kernel_intersection_dim), num(p.t_norm), num(lowest[i]),
           ok ? "true" : "false", csv_text("")});
  }
  out.results["curve_points"] = n;
  out.results["curve_accepted"] = accepted;
  out.results["gap_decreasing"] = decreasing;
}

void cmd_certify(const RunConfig& c, RunOutput& out) {
  const IntervalLaplacian model = make_model(c);
  const LagrangianDomain base = parse_domain(model, c.base);
  std::optional<LagrangianDomain> center;
  if (!c.domain.empty()) center = parse_domain(model, c.domain);
  const StabilityCertificate cert = stability_certificate(model, base, c.m, c.lambda_grid, center);
  Table& ev = out.table("evidence", {"lambda", "max_eigenvalue", "below_minus_M"});
  for (const auto& g : cert.evidence)
    ev.add({num(g.lambda), num(g.max_eigenvalue), g.max_eigenvalue <= -c.m ? "true" : "false"});
  out.results["kind"] = cert.base_is_friedrichs ? "certificate" : "evidence";
  out.results["zeta"] = cert.zeta;
  out.results["margin"] = cert.margin;
  out.results["M"] = cert.m;
  out.results["center_norm"] = cert.center_norm;
  if (cert.center_sigma) out.results["center_sigma"] = jcomplex_matrix(*cert.center_sigma);

  const auto scan = certificate_scan(model, base, cert, c.samples, c.seed);
  Table& t = out.table("perturbations", {"sample", "sigma_norm", "lowest_eigenvalue", "below_zeta"});
  int violations = 0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    t.add({std::to_string(i), num(scan[i].sigma_norm), num(scan[i].lowest_eigenvalue),
           scan[i].below_zeta ? "true" : "false"});
    if (scan[i].below_zeta) ++violations;
  }
  out.results["perturbations"] = static_cast<int>(scan.size());
  out.results["violations"] = violations;
}

void cmd_audit(const RunConfig& c, RunOutput& out) {
  const IntervalLaplacian model = make_model(c);
  const AuditReport rep = negative_count_audit(model, c.samples, c.seed, c.scale);
  Table& t = out.table("counts", {"sample", "count_below_m", "lowest_eigenvalue"});
  for (int i = 0; i < rep.samples; ++i) t.add({std::to_string(i), std::to_string(rep.counts[i]), num(rep.lowest[i])});
  out.results["samples"] = rep.samples;
  out.results["d"] = rep.d;
  out.results["m"] = rep.m;
  out.results["max_count"] = rep.max_count;
  out.results["violations"] = rep.violations;
  out.results["friedrichs_count"] = rep.friedrichs_count;

  Table& w = out.table("witness", {"lambda", "selfadjoint_residual", "secular_residual", "meets_friedrichs"});
  ojson ws = ojson::array();
  for (double l : c.lambda_grid) {
    const EigenWitness ew = eigen_witness(model, l);
    w.add({num(l), num(ew.selfadjoint_residual), num(ew.secular_residual), ew.meets_friedrichs ? "true" : "false"});
    ws.push_back({{"lambda", l}, {"domain_basis", jcomplex_matrix(ew.domain.basis())}});
  }
  out.results["witnesses"] = ws;
}

int exit_code_for(ErrorCode code) {
  if (code == ErrorCode::ConfigError) return 2;
  if (code == ErrorCode::NotCertifiable) return 4;
  return 3;
}

std::string status_for(int code) {
  switch (code) {
    case 0: return "ok";
    case 2: return "config_error";
    case 4: return "not_certifiable";
    default: return "numeric_error";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"selfadjoint extension laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, model, domain, base, grid, out_dir;
  int count = 0, truncation = 0, samples = 0, quad_order = 0, oracle_n = 0;
  std::uint64_t seed = 0;
  double m = 0, scale = 0;
  bool oracle = false;
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("--model", model, "pinned | full | synthetic");
  app.add_option("--domain", domain, "boundary condition, e.g. robin(5,1)");
  app.add_option("--base", base, "base domain for flow and certify");
  app.add_option("--lambda-grid", grid, "comma-separated lambda values");
  app.add_option("--count", count, "number of eigenvalues");
  app.add_option("--truncation", truncation, "eigen-series truncation N");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--samples", samples, "number of sampled domains or perturbations");
  app.add_option("--M", m, "chart norm bound for certify");
  app.add_option("--scale", scale, "chart scale of audit samples");
  app.add_flag("--oracle", oracle, "add finite-difference oracle columns");
  app.add_option("--oracle-n", oracle_n, "oracle grid size");
  app.add_option("--quad-order", quad_order, "Gauss-Legendre order for the Gram matrices");
  app.add_option("--out-dir", out_dir, "parent directory of run directories");
  for (const char* name : {"spectrum", "flow", "instability", "certify", "audit"}) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config_file(config_path);
    cfg.command = app.get_subcommands().front()->get_name();
    if (app.count("--model")) cfg.model = model;
    if (app.count("--domain")) cfg.domain = domain;
    if (app.count("--base")) cfg.base = base;
    if (app.count("--lambda-grid")) cfg.lambda_grid = parse_grid(grid);
    if (app.count("--count")) cfg.count = count;
    if (app.count("--truncation")) cfg.truncation = truncation;
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--samples")) cfg.samples = samples;
    if (app.count("--M")) cfg.m = m;
    if (app.count("--scale")) cfg.scale = scale;
    if (app.count("--oracle")) cfg.oracle = oracle;
    if (app.count("--oracle-n")) cfg.oracle_n = oracle_n;
    if (app.count("--quad-order")) cfg.quad_order = quad_order;
    if (app.count("--out-dir")) cfg.out_dir = out_dir;
    resolve(cfg);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  RunOutput out;
  try {
    out.dir = make_run_dir(cfg);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  ojson err = nullptr;
  try {
    if (cfg.command == "spectrum") cmd_spectrum(cfg, out);
    else if (cfg.command == "flow") cmd_flow(cfg, out);
    else if (cfg.command == "instability") cmd_instability(cfg, out);
    else if (cfg.command == "certify") cmd_certify(cfg, out);
    else cmd_audit(cfg, out);
  } catch (const Error& e) {
    code = exit_code_for(e.code());
    err = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  } catch (const std::exception& e) {
    code = 3;
    err = {{"code", "Internal"}, {"message", e.what()}};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ojson report;
  report["tool"] = "salab";
  report["version"] = kToolVersion;
  report["command"] = cfg.command;
  report["status"] = status_for(code);
  report["exit_code"] = code;
  report["config"] = to_json(cfg);
  report["config_hash"] = config_hash(cfg);
  report["results"] = out.results;
  ojson tables = ojson::object();
  for (const auto& t : out.tables) {
    write_table(out.dir, t);
    tables[t.name] = {{"file", t.name + ".csv"}, {"columns", t.columns}, {"rows", t.rows.size()}};
  }
  report["tables"] = tables;
  report["diagnostics"] = out.diagnostics;
  report["error"] = err;
  write_text(out.dir / "report.json", report.dump(2) + "\n");
  ojson timing = {{"command", cfg.command}, {"wall_seconds", secs}, {"threads", thread_budget()}};
  write_text(out.dir / "timing.json", timing.dump(2) + "\n");

  std::cout << out.dir.string() << "\n";
  if (code != 0) std::cerr << err["message"].get<std::string>() << "\n";
  return code;
}
