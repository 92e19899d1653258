#pragma once

// Spectral (in)stability experiments: detection via D ∩ D_F, the kernel flow toward D_F,
// explicit curves D_lambda -> D carrying the eigenvalue lambda, stability certificates over
// the chart centred at D_F^perp, and audits of the negative-eigenvalue bound.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "salab/parallel.hpp"
#include "salab/series.hpp"

namespace salab {

struct InstabilityVerdict {
  Subspace witness;              // D ∩ D_F
  double max_cosine = 0.0;       // largest principal-angle cosine between D and D_F
  double smallest_angle = 0.0;   // radians
  bool unstable = false;
};

inline InstabilityVerdict is_unstable(const IntervalLaplacian& model, const LagrangianDomain& d,
                                      double tol = kIntersectTol) {
  const LagrangianDomain df = model.friedrichs();
  InstabilityVerdict v{intersect(d, df, tol), 0.0, 0.0, false};
  const RVec c = principal_cosines(d, df);
  v.max_cosine = c.size() ? c(0) : 0.0;
  v.smallest_angle = std::acos(std::min(1.0, v.max_cosine));
  v.unstable = v.witness.dim() > 0;
  return v;
}

struct FlowPoint {
  double lambda = 0.0;
  double gap = 0.0;  // gap(K_lambda, D_F)
  bool ok = false;
  std::string route;
  std::string reason;  // set when the point was skipped
  std::optional<Subspace> kernel;
};

/// K_lambda along a decreasing negative grid, through F over `base` with a direct fallback.
inline std::vector<FlowPoint> kernel_flow(const IntervalLaplacian& model, const LagrangianDomain& base,
                                          const std::vector<double>& lambdas) {
  const LagrangianDomain df = model.friedrichs();
  const LagrangianDomain perp = orthocomplement(base);
  std::vector<FlowPoint> out(lambdas.size());
  parallel_for(static_cast<int>(lambdas.size()), [&](int i) {
    FlowPoint& p = out[i];
    p.lambda = lambdas[i];
    try {
      p.kernel = kernel_via_f(base, perp, f_matrix_direct(model, base, perp, p.lambda));
      p.route = "via_f";
    } catch (const Error& e) {
      try {
        p.kernel = model.kernel_direct(p.lambda);
        p.route = "direct";
        p.reason = std::string(to_string(e.code())) + " in F route";
      } catch (const Error& e2) {
        p.reason = std::string(to_string(e2.code())) + ": " + e2.what();
        return;
      }
    }
    p.gap = gap(*p.kernel, df);
    p.ok = true;
  });
  return out;
}

struct FriedrichsEstimate {
  LagrangianDomain domain;
  double lambda = 0.0;
  double gap_to_declared = 0.0;
  double selfadjoint_residual = 0.0;
};

/// K_{lambda_deep} as the numerical Friedrichs domain.
inline FriedrichsEstimate friedrichs_recover(const IntervalLaplacian& model, double lambda_deep,
                                             std::optional<LagrangianDomain> base = std::nullopt) {
  if (lambda_deep > -1e3) throw Error(ErrorCode::ConfigError, "lambda_deep must be <= -1e3");
  const LagrangianDomain b = base ? *base : orthocomplement(model.friedrichs());
  const Subspace k = kernel_via_f(model, b, lambda_deep);
  const auto chk = is_selfadjoint(k, kLagrangianTol);
  LagrangianDomain dom(k);
  return {dom, lambda_deep, gap(dom, model.friedrichs()), chk.residual};
}

struct InstabilityCurvePoint {
  double lambda = 0.0;
  std::optional<LagrangianDomain> domain;  // D_lambda
  double gap_to_base = 0.0;                // gap(D_lambda, D)
  double selfadjoint_residual = 0.0;
  int kernel_intersection_dim = 0;         // dim (D_lambda ∩ K_lambda)
  double secular_residual = 0.0;           // |secular(D_lambda, lambda)|
  double hermitian_residual = 0.0;         // of A T_lambda on D
  double t_norm = 0.0;                     // ||T_lambda||
};

/// The construction in the instability proof: V ⊆ D ∩ D_F, V_lambda, S_lambda, T_{lambda,0}, T_{lambda,1}.
inline InstabilityCurvePoint instability_curve(const IntervalLaplacian& model, const LagrangianDomain& d, double lambda,
                                               std::optional<Subspace> v_choice = std::nullopt,
                                               double cond_cap = 1e12) {
  const auto& sp = model.space();
  const CMat& g = sp->gram();
  const CMat& jm = sp->jmat();
  const LagrangianDomain df = model.friedrichs();
  const LagrangianDomain df_perp = orthocomplement(df);

  const Subspace v = v_choice ? *v_choice : intersect(d, df);
  if (v.dim() == 0) throw Error(ErrorCode::NotUnstable, "D does not meet D_F");
  if (v_choice && intersect(v, df).dim() != v.dim())
    throw Error(ErrorCode::NotUnstable, "V must lie in D ∩ D_F");

  FMatrix f;
  try {
    f = f_matrix_direct(model, df, df_perp, lambda);
  } catch (const Error&) {
    throw Error(ErrorCode::FNotInvertible, "F_{D_F}(lambda) unavailable at this lambda");
  }
  if (condition_number(f.matrix) > cond_cap) throw Error(ErrorCode::FNotInvertible, "F_{D_F}(lambda) singular");

  const CMat& qf = df_perp.basis();
  // R v = F^{-1} A v, as a map on E-coordinates (used on V ⊂ D_F)
  const CMat r = qf * f.matrix.lu().solve(qf.adjoint() * g * jm);

  const CMat& yd = d.basis();
  const LagrangianDomain d_perp = orthocomplement(d);
  const CMat& qd = d_perp.basis();
  const CMat pd = yd * yd.adjoint() * g;
  const CMat pdp = qd * qd.adjoint() * g;
  const int dd = d.dim();
  const int rr = v.dim();

  const CMat vb = v.basis();
  // W = complement of V inside D, in E-coordinates
  CMat wb(sp->dim(), dd - rr);
  if (dd > rr) {
    const CMat a = yd.adjoint() * g * vb;
    Eigen::HouseholderQR<CMat> qr(a);
    const CMat full = qr.householderQ() * CMat::Identity(dd, dd);
    wb = yd * full.rightCols(dd - rr);
  }

  const CMat vl_raw = vb + pd * r * vb;
  CMat phi(dd, dd);
  phi.leftCols(rr) = yd.adjoint() * g * vl_raw;
  if (dd > rr) phi.rightCols(dd - rr) = yd.adjoint() * g * wb;
  if (min_singular(phi) < 1e-12) throw Error(ErrorCode::FNotInvertible, "deformation map not invertible");

  const Subspace vl_sub(sp, vl_raw);
  const CMat& vl = vl_sub.basis();
  // S_lambda : V_lambda -> V, restriction of the inverse deformation
  const CMat pre = phi.lu().solve(yd.adjoint() * g * vl);
  const CMat s_vl = vb * pre.topRows(rr);
  const CMat t0_vl = pdp * r * s_vl;
  const CMat t0 = qd.adjoint() * g * t0_vl;  // matrix V_lambda -> D^perp

  CMat wl(sp->dim(), dd - rr), t1_wl(sp->dim(), dd - rr);
  if (dd > rr) {
    const CMat a = yd.adjoint() * g * vl;
    Eigen::HouseholderQR<CMat> qr(a);
    const CMat full = qr.householderQ() * CMat::Identity(dd, dd);
    wl = yd * full.rightCols(dd - rr);
    // T_{lambda,1} = A T_{lambda,0}^* A
    const CMat a1 = qd.adjoint() * g * jm * wl;
    t1_wl = jm * (vl * (t0.adjoint() * a1));
  }

  CMat basis(sp->dim(), dd), tb(sp->dim(), dd), dom_b(sp->dim(), dd);
  basis.leftCols(rr) = vl;
  tb.leftCols(rr) = t0_vl;
  if (dd > rr) {
    basis.rightCols(dd - rr) = wl;
    tb.rightCols(dd - rr) = t1_wl;
  }
  dom_b = basis + tb;

  InstabilityCurvePoint pt;
  pt.lambda = lambda;
  const CMat at = basis.adjoint() * g * jm * tb;
  pt.hermitian_residual = hermitian_residual(at);
  pt.t_norm = op_norm(qd.adjoint() * g * tb);
  const Subspace dl(sp, dom_b);
  pt.selfadjoint_residual = is_selfadjoint(dl).residual;
  pt.domain.emplace(dl);
  pt.gap_to_base = gap(dl, d);
  pt.kernel_intersection_dim = intersect(dl, model.kernel_direct(lambda)).dim();
  pt.secular_residual = std::abs(SecularFunction(model, *pt.domain).raw(lambda));
  return pt;
}

struct GridEvidence {
  double lambda = 0.0;
  double max_eigenvalue = 0.0;  // of the Hermitian matrix of F_base(lambda)
};

struct StabilityCertificate {
  bool base_is_friedrichs = false;  // true: certificate; false: grid evidence only
  double m = 0.0;
  double zeta = 0.0;
  double margin = 0.0;  // -M - max eigenvalue at zeta
  std::vector<GridEvidence> evidence;
  std::optional<CMat> center_sigma;  // chart coordinate of the centre domain over base^perp
  double center_norm = 0.0;
};

/// Default certificate grid: -10^1 ... -10^8, `per_decade` points per decade, decreasing.
inline std::vector<double> certificate_grid(int per_decade = 4) {
  std::vector<double> g;
  for (int i = 0; i <= 7 * per_decade; ++i) g.push_back(-std::pow(10.0, 1.0 + static_cast<double>(i) / per_decade));
  return g;
}

/// Largest eigenvalue of F_base(lambda) on the grid; zeta is the highest grid point such that the
/// bound max eig <= -M holds there and at every deeper point. At least three decades of grid must
/// lie below zeta.
inline StabilityCertificate stability_certificate(const IntervalLaplacian& model, const LagrangianDomain& base,
                                                  double m, std::vector<double> grid = certificate_grid(),
                                                  std::optional<LagrangianDomain> center = std::nullopt) {
  std::sort(grid.begin(), grid.end(), std::greater<>());
  const LagrangianDomain perp = orthocomplement(base);
  StabilityCertificate cert;
  cert.m = m;
  cert.base_is_friedrichs = gap(base, model.friedrichs()) < 1e-12;
  if (center) {
    try {
      cert.center_sigma = chart_of(*center, perp).sigma;
    } catch (const Error&) {
      throw Error(ErrorCode::NotCertifiable, "centre domain lies outside the chart over base^perp");
    }
    cert.center_norm = op_norm(*cert.center_sigma);
    if (cert.center_norm >= m) throw Error(ErrorCode::NotCertifiable, "M must exceed the centre's chart norm");
  }
  cert.evidence.resize(grid.size());
  parallel_for(static_cast<int>(grid.size()), [&](int i) {
    const FMatrix f = f_matrix_direct(model, base, perp, grid[i]);
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (f.matrix + f.matrix.adjoint()), Eigen::EigenvaluesOnly);
    cert.evidence[i] = {grid[i], es.eigenvalues().maxCoeff()};
  });
  int idx = static_cast<int>(grid.size());
  while (idx > 0 && cert.evidence[idx - 1].max_eigenvalue <= -m) --idx;
  if (idx == static_cast<int>(grid.size()))
    throw Error(ErrorCode::NotCertifiable, "F_base(lambda) never drops below -M on the grid");
  cert.zeta = grid[idx];
  if (cert.zeta < grid.back() * 1e-3)
    throw Error(ErrorCode::NotCertifiable, "bound holds on fewer than three decades of the grid");
  cert.margin = -m - cert.evidence[idx].max_eigenvalue;
  return cert;
}

struct PerturbationCheck {
  CMat sigma;
  double sigma_norm = 0.0;
  double lowest_eigenvalue = 0.0;
  bool below_zeta = false;
};

/// Samples chart perturbations S with ||S|| < M around the certificate centre (or 0) and
/// checks that no eigenvalue lies below zeta.
inline std::vector<PerturbationCheck> certificate_scan(const IntervalLaplacian& model, const LagrangianDomain& base,
                                                       const StabilityCertificate& cert, int n, std::uint64_t seed) {
  const LagrangianDomain perp = orthocomplement(base);
  const int d = perp.dim();
  const CMat s0 = cert.center_sigma ? *cert.center_sigma : CMat::Zero(d, d);
  const double room = cert.m - op_norm(s0);
  std::vector<PerturbationCheck> out(n);
  std::vector<CMat> sigmas(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    CMat h = random_hermitian(d, rng, 1.0);
    h /= std::max(op_norm(h), 1e-300);
    sigmas[i] = s0 + (uni(rng) * room) * h;
  }
  parallel_for(n, [&](int i) {
    PerturbationCheck& c = out[i];
    c.sigma = sigmas[i];
    c.sigma_norm = op_norm(c.sigma);
    const LagrangianDomain dom = graph_domain(GraphChart{perp, c.sigma});
    c.lowest_eigenvalue = model.eigen_system(dom, 1).pairs.front().lambda;
    c.below_zeta = c.lowest_eigenvalue < cert.zeta;
  });
  return out;
}

struct AuditReport {
  int samples = 0;
  double m = 0.0;
  int d = 0;
  int max_count = 0;
  int violations = 0;
  int friedrichs_count = 0;
  std::vector<int> counts;
  std::vector<double> lowest;
};

inline int count_below(const IntervalLaplacian& model, const LagrangianDomain& d, double m) {
  const EigenSystem es = model.eigen_system(d, model.half_dim() + 1);
  int c = 0;
  for (const auto& p : es.pairs)
    if (p.lambda < m * (1.0 - 1e-9)) ++c;
  return c;
}

/// Eigenvalues below m for domains sampled in the chart over D_F^perp.
inline AuditReport negative_count_audit(const IntervalLaplacian& model, int n_samples, std::uint64_t seed,
                                        double scale = 2.0) {
  AuditReport rep;
  rep.samples = n_samples;
  rep.m = model.lower_bound();
  rep.d = model.half_dim();
  rep.counts.assign(n_samples, 0);
  rep.lowest.assign(n_samples, 0.0);
  const LagrangianDomain base = orthocomplement(model.friedrichs());
  parallel_for(n_samples, [&](int i) {
    const LagrangianDomain dom = sample_sa(base, seed + static_cast<std::uint64_t>(i), scale);
    const EigenSystem es = model.eigen_system(dom, model.half_dim() + 1);
    int c = 0;
    for (const auto& p : es.pairs)
      if (p.lambda < rep.m * (1.0 - 1e-9)) ++c;
    rep.counts[i] = c;
    rep.lowest[i] = es.pairs.front().lambda;
  });
  for (int c : rep.counts) {
    rep.max_count = std::max(rep.max_count, c);
    if (c > rep.d) ++rep.violations;
  }
  rep.friedrichs_count = count_below(model, model.friedrichs(), rep.m);
  return rep;
}

struct EigenWitness {
  LagrangianDomain domain;  // K_lambda
  double lambda = 0.0;
  double selfadjoint_residual = 0.0;
  double secular_residual = 0.0;
  bool meets_friedrichs = false;
};

/// K_lambda is itself selfadjoint and has lambda as an eigenvalue.
inline EigenWitness eigen_witness(const IntervalLaplacian& model, double lambda, double tol = 1e-8) {
  const Subspace k = model.kernel_direct(lambda);
  const auto chk = is_selfadjoint(k, tol);
  LagrangianDomain dom(k, tol);
  const double sec = std::abs(SecularFunction(model, dom).raw(lambda));
  if (sec > 1e-6) throw Error(ErrorCode::ConsistencyFailure, "witness secular residual " + std::to_string(sec));
  return {dom, lambda, chk.residual, sec, intersect(dom, model.friedrichs()).dim() > 0};
}

struct DirectionProfile {
  CVec coords;  // coefficients on the orthonormal basis of D^perp
  double weight = 0.0;  // eigenvalue of the truncated s = 1/2 form
  std::vector<std::pair<double, Verdict>> verdicts;  // (s, verdict) over s_grid
  Verdict half = Verdict::Inconclusive;              // verdict at s = 1/2
  double growth_exponent = 0.0;
};

struct RegularitySplit {
  CMat d0;  // basis of the D_0^perp estimate, columns in D^perp coordinates
  CMat d1;  // basis of the complement estimate
  std::vector<DirectionProfile> directions;
  std::string note = "heuristic: membership of delta_u in H^{-1/2} is judged from truncated partial sums";
};

/// Splits D^perp by profiling eigen-directions of the truncated s = 1/2 form
/// H = R^H diag(1/(1+|lambda_k|)) R, R the pairing rows.
inline RegularitySplit regularity_split(const SpectralData& sd, const std::vector<double>& s_grid = {0.5}) {
  const int m = static_cast<int>(sd.rows.cols());
  const int n = sd.size();
  RVec w(n);
  for (int k = 0; k < n; ++k) w(k) = 1.0 / (1.0 + std::abs(sd.lambdas(k)));
  const CMat h = sd.rows.adjoint() * w.asDiagonal() * sd.rows;
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()));
  RegularitySplit out;
  std::vector<int> conv, div;
  for (int j = 0; j < m; ++j) {
    const CVec b = es.eigenvectors().col(j);
    DirectionProfile p;
    // c_k is antilinear in u, so the direction u = Q conj(b) has coefficients R b
    p.coords = b.conjugate();
    p.weight = es.eigenvalues()(j);
    const CVec c = sd.rows * b;
    for (double s : s_grid) p.verdicts.emplace_back(s, delta_norm_profile(sd.lambdas, c, s).verdict);
    const SobolevEstimate half = delta_norm_profile(sd.lambdas, c, 0.5);
    p.half = half.verdict;
    p.growth_exponent = half.growth_exponent;
    if (p.half == Verdict::Inconclusive)
      throw Error(ErrorCode::Inconclusive, "direction " + std::to_string(j) + " has no clear verdict");
    (p.half == Verdict::Convergent ? conv : div).push_back(j);
    out.directions.push_back(std::move(p));
  }
  out.d0.resize(m, conv.size());
  out.d1.resize(m, div.size());
  for (std::size_t i = 0; i < conv.size(); ++i) out.d0.col(i) = out.directions[conv[i]].coords;
  for (std::size_t i = 0; i < div.size(); ++i) out.d1.col(i) = out.directions[div[i]].coords;
  return out;
}

inline RegularitySplit regularity_split(const DomainSeries& ctx, const std::vector<double>& s_grid = {0.5}) {
  return regularity_split(ctx.data(), s_grid);
}

}  // namespace salab
