#pragma once

// Eigenfunction-series computations over a fixed selfadjoint domain D: pairing sequences
// c_k(u) = [psi_k, u]_A for u in D^perp, Sobolev-scale partial sums, the resolvent, the kernel
// elements phi_u(lambda), and the matrix of F_D(lambda) on a fixed orthonormal basis of D^perp.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "salab/realization.hpp"

namespace salab {

/// Spectral input of the series: eigenvalues, pairing rows for a basis of D^perp and,
/// when the model has function realizations, E-coordinates of each psi_k.
struct SpectralData {
  RVec lambdas;   // N
  CMat rows;      // N x m, rows(k, j) = c_k(q_j)
  CMat ecoords;   // 2d x N, empty for data-only models

  int size() const { return static_cast<int>(lambdas.size()); }
};

/// Data-only realization: eigenvalue rule and pairing rows, no functions behind them.
struct SyntheticRealization {
  std::function<double(int)> eigenvalue;  // k = 0, 1, ...
  std::function<CVec(int)> row;           // c_k on a basis of D^perp
  int complement_dim = 1;

  double lower_bound(int n = 1) const {
    double m = eigenvalue(0);
    for (int k = 1; k < n; ++k) m = std::min(m, eigenvalue(k));
    return m;
  }
  bool bg_check(double) const { return true; }

  SpectralData data(int n) const {
    SpectralData d;
    d.lambdas.resize(n);
    d.rows.resize(n, complement_dim);
    for (int k = 0; k < n; ++k) {
      d.lambdas(k) = eigenvalue(k);
      d.rows.row(k) = row(k).transpose();
    }
    return d;
  }

  /// lambda_k = a (k+1)^p, c_k = amp_j (k+1)^q on each basis vector j.
  static SyntheticRealization power_law(double a, double p, const RVec& amps, double q) {
    SyntheticRealization s;
    s.eigenvalue = [a, p](int k) { return a * std::pow(k + 1.0, p); };
    s.row = [amps, q](int k) { return CVec((amps * std::pow(k + 1.0, q)).cast<cplx>()); };
    s.complement_dim = static_cast<int>(amps.size());
    return s;
  }
};

struct DeltaCoefficients {
  LagrangianDomain domain;
  CVec u;
  RVec lambdas;
  CVec c;
  int truncation = 0;
  double consistency_residual = 0.0;  // max (4.2) defect over k <= 10; 0 for data-only input
};

inline double spectrum_margin(double lambda) { return 1e-6 * (1.0 + std::abs(lambda)); }

inline void check_separated(const RVec& lambdas, cplx lambda) {
  for (int k = 0; k < lambdas.size(); ++k)
    if (std::abs(cplx(lambdas(k)) - lambda) < spectrum_margin(std::abs(lambda)))
      throw Error(ErrorCode::SpectrumCollision, "lambda too close to eigenvalue " + std::to_string(lambdas(k)));
}

/// (u, psi_k) and (A u, psi_k) in L2 by quadrature, u an E-element.
inline std::pair<cplx, cplx> l2_products(const IntervalLaplacian& model, const CVec& u, const EigenPair& p) {
  static const GaussLegendre rule(32);
  const int panels = panels_for_rate(std::sqrt(std::abs(p.lambda)));
  const cplx a = rule.integrate([&](double x) { return model.eval(u, 0, x) * std::conj(p.eval(0, x)); }, 0.0, 1.0,
                                panels);
  const cplx b = rule.integrate([&](double x) { return -model.eval(u, 2, x) * std::conj(p.eval(0, x)); }, 0.0, 1.0,
                                panels);
  return {a, b};
}

/// Largest defect in (u, psi_k) = lambda_k conj(c_k)/(1+lambda_k^2), (Au, psi_k) = -conj(c_k)/(1+lambda_k^2).
inline double consistency_residual(const IntervalLaplacian& model, const EigenSystem& es, const CVec& u,
                                   const CVec& c, int kmax = 10) {
  double worst = 0.0;
  for (int k = 0; k < std::min<int>(kmax, es.size()); ++k) {
    const double lk = es.pairs[k].lambda;
    const auto [up, aup] = l2_products(model, u, es.pairs[k]);
    const cplx e1 = lk * std::conj(c(k)) / (1 + lk * lk);
    const cplx e2 = -std::conj(c(k)) / (1 + lk * lk);
    worst = std::max({worst, std::abs(up - e1), std::abs(aup - e2)});
  }
  return worst;
}

inline DeltaCoefficients delta_coefficients(const IntervalLaplacian& model, const EigenSystem& es, const CVec& u,
                                            double tol = 1e-6) {
  const auto& d = es.domain;
  const double nu = std::max(1.0, d.parent().norm(u));
  if (d.parent().norm(d.subspace().project(u)) > 1e-8 * nu)
    throw Error(ErrorCode::NotInComplement, "u is not A-orthogonal to D");
  DeltaCoefficients out{d, u, es.eigenvalues(), CVec(es.size()), es.size(), 0.0};
  for (int k = 0; k < es.size(); ++k) out.c(k) = model.pairing(u, es.pairs[k]);
  out.consistency_residual = consistency_residual(model, es, u, out.c);
  if (out.consistency_residual > tol)
    throw Error(ErrorCode::ConsistencyFailure, "pairing identities violated, defect " +
                                                   std::to_string(out.consistency_residual));
  return out;
}

inline DeltaCoefficients delta_coefficients(const IntervalLaplacian& model, const LagrangianDomain& d, const CVec& u,
                                            int n) {
  return delta_coefficients(model, model.eigen_system(d, n), u);
}

/// Passthrough for data-only models: coefficients of basis vector j of D^perp.
inline DeltaCoefficients delta_coefficients(const SyntheticRealization& syn, const LagrangianDomain& d, int j, int n) {
  const SpectralData sd = syn.data(n);
  CVec u = CVec::Zero(d.parent().dim());
  return DeltaCoefficients{d, u, sd.lambdas, sd.rows.col(j), n, 0.0};
}

enum class Verdict { Convergent, Divergent, Inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Convergent: return "convergent";
    case Verdict::Divergent: return "divergent";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct SobolevEstimate {
  double s = 0.0;
  std::vector<int> grid;
  std::vector<double> partial_sums;
  double growth_exponent = 0.0;     // slope of log P_N vs log N over the top decade
  double increment_exponent = 0.0;  // slope of log (P_{N_i} - P_{N_{i-1}}) vs log N_i, same window
  double last_increment = 0.0;
  double max_term_tail = 0.0;       // largest single term beyond N = grid.back() / 20
  Verdict verdict = Verdict::Inconclusive;
};

/// Geometric truncation grid from n_min to n_max (inclusive), about `per_decade` points per decade.
inline std::vector<int> geometric_grid(int n_min, int n_max, int per_decade = 10) {
  std::vector<int> g;
  const double r = std::pow(10.0, 1.0 / per_decade);
  for (double x = n_min; x < n_max; x *= r) {
    const int v = static_cast<int>(std::lround(x));
    if (g.empty() || v > g.back()) g.push_back(v);
  }
  if (g.empty() || g.back() != n_max) g.push_back(n_max);
  return g;
}

namespace detail {
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return std::nan("");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
  return sxy / sxx;
}
}  // namespace detail

/// Partial sums P_N = sum_{k<N} |c_k|^2 / (1 + |lambda_k|)^{2s} and a convergence verdict.
inline SobolevEstimate delta_norm_profile(const RVec& lambdas, const CVec& c, double s, std::vector<int> grid = {}) {
  const int n = static_cast<int>(c.size());
  if (grid.empty()) grid = geometric_grid(10, n);
  SobolevEstimate est;
  est.s = s;
  est.grid = grid;
  std::vector<double> terms(n);
  for (int k = 0; k < n; ++k) terms[k] = std::norm(c(k)) / std::pow(1.0 + std::abs(lambdas(k)), 2 * s);
  double acc = 0.0;
  int k = 0;
  for (int g : grid) {
    if (g > n) throw Error(ErrorCode::DimensionMismatch, "grid exceeds truncation");
    for (; k < g; ++k) acc += terms[k];
    est.partial_sums.push_back(acc);
  }
  const int top = grid.back();
  for (int j = top / 20; j < n; ++j) est.max_term_tail = std::max(est.max_term_tail, terms[j]);

  std::vector<double> lx, lp, li, lxi;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] * 10 < top) continue;
    if (est.partial_sums[i] > 0) {
      lx.push_back(std::log(grid[i]));
      lp.push_back(std::log(est.partial_sums[i]));
    }
    if (i > 0) {
      const double inc = est.partial_sums[i] - est.partial_sums[i - 1];
      if (inc > 0) {
        lxi.push_back(std::log(grid[i]));
        li.push_back(std::log(inc));
      }
    }
  }
  est.growth_exponent = lx.size() >= 2 ? detail::fit_slope(lx, lp) : 0.0;
  est.increment_exponent = lxi.size() >= 2 ? detail::fit_slope(lxi, li) : std::nan("");
  est.last_increment =
      grid.size() >= 2 ? est.partial_sums.back() - est.partial_sums[grid.size() - 2] : est.partial_sums.back();

  if (est.growth_exponent > 0.1) {
    est.verdict = Verdict::Divergent;
  } else if (est.last_increment < 1e-8 * std::max(1.0, est.partial_sums.back())) {
    est.verdict = Verdict::Convergent;
  } else if (std::isfinite(est.increment_exponent)) {
    est.verdict = est.increment_exponent < -0.1 ? Verdict::Convergent : Verdict::Divergent;
  }
  return est;
}

inline SobolevEstimate delta_norm_profile(const DeltaCoefficients& dc, double s, std::vector<int> grid = {}) {
  return delta_norm_profile(dc.lambdas, dc.c, s, std::move(grid));
}

struct HsNorm {
  double value = 0.0;
  bool tail_significant = false;  // last term above 1e-6 of the total
};

/// (1 + |lambda_k|)^s weighted l2 norm of eigen-coefficients.
inline HsNorm hs_norm(const RVec& lambdas, const CVec& f, double s) {
  if (f.size() > lambdas.size()) throw Error(ErrorCode::DimensionMismatch, "more coefficients than eigenvalues");
  double acc = 0.0, last = 0.0;
  for (int k = 0; k < f.size(); ++k) {
    last = std::pow(1.0 + std::abs(lambdas(k)), 2 * s) * std::norm(f(k));
    acc += last;
  }
  return {std::sqrt(acc), acc > 0 && last > 1e-6 * acc};
}

/// B_D(lambda) f in eigen-coefficients.
inline CVec resolvent_apply(const RVec& lambdas, const CVec& f, cplx lambda) {
  check_separated(lambdas.head(f.size()), lambda);
  CVec out(f.size());
  for (int k = 0; k < f.size(); ++k) out(k) = f(k) / (lambdas(k) - lambda);
  return out;
}

namespace detail {

/// Asymptotic remainder sum_{k >= n} w_k t_k of a series with weights
/// w_k = (1 + lambda lambda_k) / ((1 + lambda_k^2)(lambda_k - lambda)), assuming lambda_k ~ a k^p and
/// t_k / lambda_k ~ B k^r over the last block (k 1-based). Uses
/// w_k lambda_k = lambda / lambda_k + (1 + lambda^2) / lambda_k^2 + O(lambda_k^-3) and midpoint
/// integrals for the power sums. Returns nullopt when the data are not in that regime.
template <class Term>
std::optional<CMat> series_remainder(const RVec& lambdas, int n, cplx lambda, Term term) {
  constexpr int block = 32, half = block / 2;
  if (n < 4 * block || lambdas.size() < n) return std::nullopt;
  const double l0 = lambdas(n - block), l1 = lambdas(n - 1);
  if (!(l0 > 0) || !(l1 > l0)) return std::nullopt;
  const double p = std::log(l1 / l0) / std::log(static_cast<double>(n) / (n - block + 1));
  if (!(p > 1.05)) return std::nullopt;
  const double a = l1 / std::pow(static_cast<double>(n), p);
  CMat first, second;
  for (int k = n - block; k < n; ++k) {
    const CMat t = term(k) / (lambdas(k) * half);
    CMat& acc = k < n - half ? first : second;
    if (acc.size() == 0) acc = CMat::Zero(t.rows(), t.cols());
    acc += t;
  }
  const double nf = op_norm(first), ns = op_norm(second);
  if (!(nf > 0) || !(ns > 0)) return std::nullopt;
  // block centres, 1-based
  const double c1 = n - block + 0.5 * (half + 1), c2 = n - half + 0.5 * (half + 1);
  const double r = std::log(ns / nf) / std::log(c2 / c1);
  const CMat b = second / std::pow(c2, r);
  if (op_norm(b * std::pow(c1, r) - first) > 1e-2 * nf || !(p - r > 1.05)) return std::nullopt;
  const double x = n + 0.5;
  const double s1 = std::pow(x, 1 + r - p) / (a * (p - r - 1));
  const double s2 = std::pow(x, 1 + r - 2 * p) / (a * a * (2 * p - r - 1));
  return CMat((lambda * s1 + (1.0 + lambda * lambda) * s2) * b);
}

}  // namespace detail

struct PhiU {
  CVec coeffs;        // conj(c_k)/(lambda_k - lambda)
  CVec eproj;         // E-coordinates of pi_max phi_u
  double tail = 0.0;  // size of the uncorrected truncation remainder of eproj
};

/// Kernel element phi_u(lambda) with phi_u - u in the domain.
/// Its E-projection is u + sum_k (phi_u - u, psi_k) pi_max psi_k, where
/// (phi_u - u, psi_k) = conj(c_k) (1 + lambda lambda_k) / ((1 + lambda_k^2)(lambda_k - lambda)).
inline PhiU phi_u(const DeltaCoefficients& dc, const EigenSystem& es, double lambda) {
  check_separated(dc.lambdas, lambda);
  const int n = static_cast<int>(dc.c.size());
  PhiU out;
  out.coeffs.resize(n);
  out.eproj = dc.u;
  CVec last = CVec::Zero(dc.u.size());
  for (int k = 0; k < n; ++k) {
    const double lk = dc.lambdas(k);
    out.coeffs(k) = std::conj(dc.c(k)) / (lk - lambda);
    const cplx w = std::conj(dc.c(k)) * (1 + lambda * lk) / ((1 + lk * lk) * (lk - lambda));
    last = w * es.pairs[k].ecoords;
    out.eproj += last;
  }
  out.tail = n * last.norm();
  auto term = [&](int k) { return CMat(es.pairs[k].ecoords * std::conj(dc.c(k))); };
  if (const auto r = detail::series_remainder(dc.lambdas, n, lambda, term)) out.eproj += r->col(0);
  return out;
}

struct FMatrix {
  cplx lambda;
  int truncation = 0;  // 0 for the direct route
  CMat matrix;         // (F q_j, q_i)_A on the fixed orthonormal basis of D^perp
  double tail = 0.0;             // size of the uncorrected remainder
  double tail_correction = 0.0;  // norm of the asymptotic remainder added (0 if none)
  double hermitian_residual = 0.0;
  std::string route;
};


/// F_D(lambda) from the eigen-series. rows(k, j) = c_k(q_j). With `correct`, the asymptotic
/// remainder beyond n is added when the data allow it.
inline FMatrix f_matrix_series(const SpectralData& sd, cplx lambda, int n = -1, double tail_cap = 1e-1,
                               bool correct = true) {
  if (n < 0) n = sd.size();
  if (n > sd.size()) throw Error(ErrorCode::DimensionMismatch, "truncation exceeds spectral data");
  check_separated(sd.lambdas.head(n), lambda);
  const int m = static_cast<int>(sd.rows.cols());
  CMat f = CMat::Zero(m, m);
  CMat last = CMat::Zero(m, m);
  for (int k = 0; k < n; ++k) {
    const double lk = sd.lambdas(k);
    const cplx w = (1.0 + lambda * lk) / ((1.0 + lk * lk) * (lk - lambda));
    last = w * (sd.rows.row(k).transpose() * sd.rows.row(k).conjugate());
    f += last;
  }
  FMatrix out;
  out.lambda = lambda;
  out.truncation = n;
  out.matrix = f;
  // terms decay like k^-2, so the remainder is about n times the last term
  out.tail = n * op_norm(last);
  out.route = "series";
  if (out.tail > tail_cap * std::max(1.0, op_norm(f)))
    throw Error(ErrorCode::TailTooLarge, "series tail " + std::to_string(out.tail));
  if (correct) {
    auto term = [&](int k) { return CMat(sd.rows.row(k).transpose() * sd.rows.row(k).conjugate()); };
    if (const auto r = detail::series_remainder(sd.lambdas, n, lambda, term)) {
      out.matrix += *r;
      out.tail_correction = op_norm(*r);
    }
  }
  out.hermitian_residual = hermitian_residual(out.matrix);
  return out;
}

/// Per-domain context: fixed orthonormal basis of D^perp, eigen-system and pairing rows.
class DomainSeries {
 public:
  DomainSeries(const IntervalLaplacian& model, const LagrangianDomain& d, int n)
      : model_(&model), domain_(d), perp_(orthocomplement(d)), eig_(model.eigen_system(d, n)) {
    data_.lambdas = eig_.eigenvalues();
    const int m = perp_.dim();
    data_.rows.resize(eig_.size(), m);
    data_.ecoords.resize(d.parent().dim(), eig_.size());
    for (int k = 0; k < eig_.size(); ++k) {
      for (int j = 0; j < m; ++j) data_.rows(k, j) = model.pairing(perp_.basis().col(j), eig_.pairs[k]);
      data_.ecoords.col(k) = eig_.pairs[k].ecoords;
    }
  }

  const IntervalLaplacian& model() const { return *model_; }
  const LagrangianDomain& domain() const { return domain_; }
  const LagrangianDomain& complement() const { return perp_; }
  const EigenSystem& eigen() const { return eig_; }
  const SpectralData& data() const { return data_; }

  DeltaCoefficients delta(int j) const {
    return DeltaCoefficients{domain_, perp_.basis().col(j), data_.lambdas, data_.rows.col(j), eig_.size(), 0.0};
  }

 private:
  const IntervalLaplacian* model_;
  LagrangianDomain domain_;
  LagrangianDomain perp_;
  EigenSystem eig_;
  SpectralData data_;
};

inline FMatrix f_matrix_series(const DomainSeries& ctx, double lambda, int n = -1) {
  return f_matrix_series(ctx.data(), cplx(lambda), n);
}

/// F_D(lambda) without series: phi_u from a trace solve against the kernel, then F u = -J(u - pi_max phi_u).
inline FMatrix f_matrix_direct(const IntervalLaplacian& model, const LagrangianDomain& d, const LagrangianDomain& perp,
                               double lambda) {
  const auto& sp = model.space();
  const CMat kt = model.kernel_traces(lambda);
  const CMat& y = d.basis();
  const CMat& q = perp.basis();
  const CMat c = y.adjoint() * sp->green_matrix();
  const CMat ck = c * kt;
  Eigen::JacobiSVD<CMat> svd(ck);
  const RVec& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-12 * s(0))
    throw Error(ErrorCode::SingularTraceSolve, "lambda is (numerically) an eigenvalue of A_D");
  const CMat beta = ck.fullPivLu().solve(c * q);
  const CMat fu = -sp->jmat() * (q - kt * beta);
  FMatrix out;
  out.lambda = lambda;
  out.matrix = q.adjoint() * sp->gram() * fu;
  out.hermitian_residual = hermitian_residual(out.matrix);
  out.route = "direct";
  return out;
}

inline FMatrix f_matrix_direct(const IntervalLaplacian& model, const LagrangianDomain& d, double lambda) {
  return f_matrix_direct(model, d, orthocomplement(d), lambda);
}

inline double condition_number(const CMat& m) {
  Eigen::JacobiSVD<CMat> svd(m);
  const RVec& s = svd.singularValues();
  return s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
}

/// K_lambda = {v + F^{-1} A v : v in D}, in E-coordinates.
inline Subspace kernel_via_f(const LagrangianDomain& d, const LagrangianDomain& perp, const FMatrix& f,
                             double cond_cap = 1e12) {
  const auto& sp = d.space();
  if (condition_number(f.matrix) > cond_cap) throw Error(ErrorCode::SingularF, "F_D(lambda) is not invertible");
  const CMat& y = d.basis();
  const CMat& q = perp.basis();
  const CMat av = q.adjoint() * sp->gram() * sp->jmat() * y;
  const CMat x = y + q * f.matrix.lu().solve(av);
  return Subspace(sp, x);
}

inline Subspace kernel_via_f(const IntervalLaplacian& model, const LagrangianDomain& d, double lambda) {
  const LagrangianDomain perp = orthocomplement(d);
  return kernel_via_f(d, perp, f_matrix_direct(model, d, perp, lambda));
}

/// K_lambda spanned by E-projections of phi_u over the basis of D^perp.
inline Subspace kernel_via_series(const DomainSeries& ctx, double lambda) {
  const int m = ctx.complement().dim();
  CMat x(ctx.domain().parent().dim(), m);
  for (int j = 0; j < m; ++j) x.col(j) = phi_u(ctx.delta(j), ctx.eigen(), lambda).eproj;
  return Subspace(ctx.domain().space(), x);
}

}  // namespace salab
