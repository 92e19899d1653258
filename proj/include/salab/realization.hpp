#pragma once

// Interval Laplacians A = -d^2/dx^2 on (0, 1) with closed-form extension spaces.
//
// Pinned: core functions vanish near 0 and at 1, D_max = {u in H^2 : u(1) = 0}, d = 1.
// Full:   core C_c^infty(0, 1), D_max = H^2(0, 1), d = 2.
//
// In both cases the basis of E is chosen so that E-coordinates are boundary traces:
// pinned (u(0), u'(0)), full (u(0), u'(0), u(1), u'(1)). Elements of D_min have vanishing
// traces at these slots, so the E-projection of any u in D_max carries the traces of u.
//
// The embedding D_max -> L2 is compact (H^2 -> L2 on a bounded interval), and both
// minimal operators satisfy (A u, u) = int |u'|^2 >= pi^2 ||u||^2 by Poincare.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "salab/green.hpp"
#include "salab/quadrature.hpp"
#include "salab/solution_pair.hpp"

namespace salab {

enum class BoundaryModel { Pinned, Full };

inline std::string to_string(BoundaryModel m) { return m == BoundaryModel::Pinned ? "pinned" : "full"; }

/// Closed-form real solutions of u'''' = -u combined so that prescribed trace rows are unit vectors.
class QuarticBasis {
 public:
  QuarticBasis() = default;

  explicit QuarticBasis(BoundaryModel kind) {
    // Trace rows: pinned [u(0), u'(0), u(1), u''(1)], full [u(0), u'(0), u(1), u'(1)].
    Eigen::Matrix4d t;
    for (int m = 0; m < 4; ++m) {
      t(0, m) = fundamental(m, 0, 0.0);
      t(1, m) = fundamental(m, 1, 0.0);
      t(2, m) = fundamental(m, 0, 1.0);
      t(3, m) = fundamental(m, kind == BoundaryModel::Pinned ? 2 : 1, 1.0);
    }
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(t);
    const auto& sv = svd.singularValues();
    if (sv(3) < 1e-12 * sv(0)) throw Error(ErrorCode::SingularTraceMap, "trace map of E is singular");
    const int n = kind == BoundaryModel::Pinned ? 2 : 4;
    coef_ = t.inverse().leftCols(n);
  }

  int size() const { return static_cast<int>(coef_.cols()); }

  /// n-th derivative of basis function j at x.
  double eval(int j, int n, double x) const {
    double acc = 0.0;
    for (int m = 0; m < 4; ++m) acc += coef_(m, j) * fundamental(m, n, x);
    return acc;
  }

  /// Re / Im of exp(w x), w in {a(1+i), a(-1+i)}, a = 1/sqrt(2); all satisfy u'''' = -u.
  static double fundamental(int m, int n, double x) {
    static const double a = 1.0 / std::sqrt(2.0);
    const cplx w = (m < 2) ? cplx(a, a) : cplx(-a, a);
    const cplx v = std::pow(w, n) * std::exp(w * x);
    return (m % 2 == 0) ? v.real() : v.imag();
  }

 private:
  RMat coef_;
};

struct EigenPair {
  double lambda = 0.0;
  Eigen::Vector2cd coef;  // normalized eigenfunction in the SolutionPair(lambda) basis
  CVec traces;            // (psi(0), psi'(0), psi(1), psi'(1))
  CVec ecoords;           // E-projection coordinates
  double l2_norm_raw = 1.0;

  cplx eval(int n, double x) const {
    const SolutionPair sp(lambda);
    return coef(0) * sp.eval(0, n, x) + coef(1) * sp.eval(1, n, x);
  }
};

struct EigenSystem {
  LagrangianDomain domain;
  std::vector<EigenPair> pairs;

  int size() const { return static_cast<int>(pairs.size()); }
  RVec eigenvalues() const {
    RVec v(size());
    for (int k = 0; k < size(); ++k) v(k) = pairs[k].lambda;
    return v;
  }
};

class IntervalLaplacian;

/// The secular function of one domain. Its raw value det(C K)/sqrt(det K^H G K) has a constant
/// phase along the real axis for selfadjoint conditions; the phase is fixed once and removed.
class SecularFunction {
 public:
  using Small = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

  SecularFunction(const IntervalLaplacian& model, const LagrangianDomain& d);

  cplx raw(double lambda) const;
  double operator()(double lambda) const { return (raw(lambda) * phase_).real(); }
  /// Imaginary part left after the phase correction, relative to |f|.
  double phase_defect(double lambda) const {
    const cplx f = raw(lambda) * phase_;
    return std::abs(f) > 0 ? std::abs(f.imag()) / std::abs(f) : 0.0;
  }

 private:
  const IntervalLaplacian* model_;
  Small c_;
  cplx phase_{1.0, 0.0};
};

class IntervalLaplacian {
 public:
  explicit IntervalLaplacian(BoundaryModel kind, int quad_order = 96)
      : kind_(kind), quad_order_(quad_order), basis_(kind) {
    if (quad_order < 8) throw Error(ErrorCode::QuadratureFailure, "quadrature order too small");
    const GaussLegendre rule(quad_order);
    const int n = basis_.size();
    RMat g(n, n), m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        g(i, j) = rule.integrate([&](double x) {
          return basis_.eval(i, 2, x) * basis_.eval(j, 2, x) + basis_.eval(i, 0, x) * basis_.eval(j, 0, x);
        });
        // m(i, j) = (A b_j, b_i)_A = -int b_j'''' b_i'' - int b_j'' b_i
        m(i, j) = -rule.integrate([&](double x) {
          return basis_.eval(j, 4, x) * basis_.eval(i, 2, x) + basis_.eval(j, 2, x) * basis_.eval(i, 0, x);
        });
      }
    }
    if (!g.allFinite() || !m.allFinite()) throw Error(ErrorCode::QuadratureFailure, "non-finite Gram entries");
    const RMat gs = 0.5 * (g + g.transpose());
    const RMat j = gs.ldlt().solve(m);
    space_ = ExtensionSpace::validate(gs.cast<cplx>(), j.cast<cplx>());
  }

  static IntervalLaplacian pinned(int quad_order = 96) { return IntervalLaplacian(BoundaryModel::Pinned, quad_order); }
  static IntervalLaplacian full(int quad_order = 96) { return IntervalLaplacian(BoundaryModel::Full, quad_order); }

  BoundaryModel kind() const { return kind_; }
  std::string name() const { return to_string(kind_); }
  int half_dim() const { return kind_ == BoundaryModel::Pinned ? 1 : 2; }
  int quad_order() const { return quad_order_; }
  const SpacePtr& space() const { return space_; }
  const QuarticBasis& basis() const { return basis_; }

  /// n-th derivative at x of the E-element with coordinates u.
  cplx eval(const CVec& u, int n, double x) const {
    cplx acc = 0.0;
    for (int j = 0; j < basis_.size(); ++j) acc += u(j) * basis_.eval(j, n, x);
    return acc;
  }

  /// (u(0), u'(0), u(1), u'(1)) of the E-element u.
  CVec full_traces(const CVec& u) const {
    if (kind_ == BoundaryModel::Full) return u;
    CVec t(4);
    t << u(0), u(1), eval(u, 0, 1.0), eval(u, 1, 1.0);
    return t;
  }

  LagrangianDomain domain(const CMat& ecoords) const { return LagrangianDomain(space_, ecoords); }

  LagrangianDomain friedrichs() const {
    const int n = space_->dim();
    CMat y = CMat::Zero(n, half_dim());
    y(1, 0) = 1.0;
    if (kind_ == BoundaryModel::Full) y(3, 1) = 1.0;
    return domain(y);
  }

  double lower_bound() const { return kPi * kPi; }

  /// Kernel of A_max - lambda in the SolutionPair basis (2 x d).
  Eigen::Matrix<double, 2, Eigen::Dynamic, 0, 2, 2> kernel_coeffs(const SolutionPair& sp) const {
    Eigen::Matrix<double, 2, Eigen::Dynamic, 0, 2, 2> k(2, half_dim());
    if (kind_ == BoundaryModel::Pinned) {
      // vanishes at 1; a positive multiple of s(1 - x)
      k(0, 0) = sp.eval(1, 0, 1.0);
      k(1, 0) = -sp.eval(0, 0, 1.0);
    } else {
      k.setIdentity();
    }
    return k;
  }

  /// E-coordinates of the kernel basis (trace route), 2d x d.
  SecularFunction::Small kernel_traces(const SolutionPair& sp) const {
    const auto kc = kernel_coeffs(sp);
    const int d = half_dim();
    const int rows = space_->dim();
    Eigen::Matrix<double, 4, 2> tr;
    for (int j = 0; j < 2; ++j) {
      const auto t = sp.traces(j);
      for (int r = 0; r < 4; ++r) tr(r, j) = t[r];
    }
    SecularFunction::Small k(rows, d);
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < rows; ++r) k(r, c) = tr(r, 0) * kc(0, c) + tr(r, 1) * kc(1, c);
    return k;
  }

  CMat kernel_traces(double lambda) const { return kernel_traces(SolutionPair(lambda)); }

  /// Injectivity of A_min - lambda: no kernel function satisfies every minimal-domain condition.
  bool bg_check(double lambda) const {
    const SolutionPair sp(lambda);
    const auto kc = kernel_coeffs(sp);
    // Pinned minimal conditions: u(0) = u'(0) = u(1) = 0 (u(1) = 0 already built in).
    // Full minimal conditions: all four traces vanish.
    RMat rows(4, half_dim());
    for (int c = 0; c < half_dim(); ++c) {
      for (int r = 0; r < 4; ++r) {
        const double x = r < 2 ? 0.0 : 1.0;
        const int n = r % 2;
        rows(r, c) = kc(0, c) * sp.eval(0, n, x) + kc(1, c) * sp.eval(1, n, x);
      }
      const double nrm = rows.col(c).norm();
      if (nrm == 0.0) return false;
      rows.col(c) /= nrm;
    }
    Eigen::JacobiSVD<RMat> svd(rows);
    return svd.singularValues()(half_dim() - 1) > 1e-12;
  }

  /// K_lambda by A-inner-product quadrature of kernel functions against the E basis.
  Subspace kernel_direct(double lambda) const {
    if (!bg_check(lambda)) throw Error(ErrorCode::BackgroundSpectrum, "lambda in background spectrum");
    const SolutionPair sp(lambda);
    const auto kc = kernel_coeffs(sp);
    static const GaussLegendre rule(32);
    const int panels = panels_for_rate(sp.rate());
    const int n = space_->dim();
    CMat r(n, half_dim());
    for (int c = 0; c < half_dim(); ++c) {
      for (int i = 0; i < n; ++i) {
        r(i, c) = rule.integrate(
            [&](double x) {
              const double phi = kc(0, c) * sp.eval(0, 0, x) + kc(1, c) * sp.eval(1, 0, x);
              // phi'' = -lambda phi
              return -lambda * phi * basis_.eval(i, 2, x) + phi * basis_.eval(i, 0, x);
            },
            0.0, 1.0, panels);
      }
    }
    const CMat x = space_->gram().ldlt().solve(r);
    return Subspace(space_, x);
  }

  double secular(const LagrangianDomain& d, double lambda) const { return SecularFunction(*this, d)(lambda); }

  EigenSystem eigen_system(const LagrangianDomain& d, int count) const;

  /// Boundary Wronskian [psi, u]_A for u given by E-coordinates.
  cplx pairing(const CVec& u, const EigenPair& p) const {
    const CVec& t = p.traces;
    cplx w = t(1) * std::conj(u(0)) - t(0) * std::conj(u(1));
    if (kind_ == BoundaryModel::Full) w += -t(3) * std::conj(u(2)) + t(2) * std::conj(u(3));
    return w;
  }

  /// (A psi, u) - (psi, A u) by quadrature; independent check of pairing().
  cplx pairing_quadrature(const CVec& u, const EigenPair& p) const {
    static const GaussLegendre rule(32);
    const int panels = panels_for_rate(std::sqrt(std::abs(p.lambda)));
    return rule.integrate(
        [&](double x) {
          return -p.eval(2, x) * std::conj(eval(u, 0, x)) + p.eval(0, x) * std::conj(eval(u, 2, x));
        },
        0.0, 1.0, panels);
  }

 private:
  BoundaryModel kind_;
  int quad_order_;
  QuarticBasis basis_;
  SpacePtr space_;
};

template <class R>
concept RealizationContract = requires(const R& r, const LagrangianDomain& d, const CVec& u, const EigenPair& p,
                                       double lambda, int count) {
  { r.space() } -> std::convertible_to<SpacePtr>;
  { r.friedrichs() } -> std::convertible_to<LagrangianDomain>;
  { r.lower_bound() } -> std::convertible_to<double>;
  { r.secular(d, lambda) } -> std::convertible_to<double>;
  { r.eigen_system(d, count) } -> std::convertible_to<EigenSystem>;
  { r.pairing(u, p) } -> std::convertible_to<cplx>;
  { r.kernel_direct(lambda) } -> std::convertible_to<Subspace>;
  { r.bg_check(lambda) } -> std::convertible_to<bool>;
};

static_assert(RealizationContract<IntervalLaplacian>);

inline SecularFunction::SecularFunction(const IntervalLaplacian& model, const LagrangianDomain& d) : model_(&model) {
  if (d.space() != model.space()) throw Error(ErrorCode::DimensionMismatch, "domain belongs to another space");
  c_ = d.basis().adjoint() * model.space()->green_matrix();
  double best = -1.0;
  cplx ref = 1.0;
  for (double lam : {-31.0, -7.3, -2.1, -0.37, 0.41, 3.3, 13.7, 31.9}) {
    const cplx f = raw(lam);
    if (std::abs(f) > best) {
      best = std::abs(f);
      ref = f;
    }
  }
  double theta = std::arg(ref);
  theta = std::fmod(theta + 2 * kPi, kPi);
  phase_ = std::polar(1.0, -theta);
}

inline cplx SecularFunction::raw(double lambda) const {
  const SolutionPair sp(lambda);
  const Small k = model_->kernel_traces(sp);
  const Small ck = c_ * k;
  const Small kgk = k.adjoint() * model_->space()->gram() * k;
  const double den = std::sqrt(std::abs(kgk.determinant().real()));
  return ck.determinant() / den;
}

namespace detail {

inline double mu_to_lambda(double mu) { return mu >= 0 ? mu * mu : -mu * mu; }

/// Scan grid in mu = sign(lambda) sqrt|lambda|: geometric in kappa on the far negative side,
/// uniform near zero, then steps of pi/16 in omega.
inline std::vector<double> negative_grid(double kappa_max) {
  std::vector<double> g;
  for (double k = kappa_max; k > 1.0; k /= 1.01) g.push_back(-k);
  for (int i = 50; i > 0; --i) g.push_back(-0.02 * i);
  return g;
}

}  // namespace detail

inline EigenSystem IntervalLaplacian::eigen_system(const LagrangianDomain& dom, int count) const {
  if (count < 1) throw Error(ErrorCode::RootFindingStall, "count must be positive");
  const SecularFunction sec(*this, dom);
  auto f = [&](double mu) { return sec(detail::mu_to_lambda(mu)); };

  std::vector<double> roots;
  const double scale_tol = 1e-8;  // relative to the bracketing values
  boost::math::tools::eps_tolerance<double> tol(50);

  auto refine_sign_change = [&](double a, double b, double fa, double fb) {
    std::uintmax_t it = 200;
    const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, it);
    roots.push_back(0.5 * (r.first + r.second));
  };

  // Local minimum of |f| without a sign change: either a close pair of roots or nothing.
  auto refine_dip = [&](double a, double b, double sgn) {
    auto g = [&](double mu) { return sgn * f(mu); };
    std::uintmax_t it = 200;
    const auto m = boost::math::tools::brent_find_minima(g, a, b, 52, it);
    if (m.second < 0) {
      refine_sign_change(a, m.first, f(a), f(m.first));
      refine_sign_change(m.first, b, f(m.first), f(b));
    } else if (m.second < scale_tol * std::max(std::abs(f(a)), std::abs(f(b)))) {
      throw Error(ErrorCode::MultiplicityAmbiguity,
                  "double root near lambda = " + std::to_string(detail::mu_to_lambda(m.first)));
    }
  };

  std::vector<double> mus = detail::negative_grid(1e4);
  mus.push_back(0.0);
  std::vector<double> fv(mus.size());
  for (std::size_t i = 0; i < mus.size(); ++i) fv[i] = f(mus[i]);

  std::size_t next = 0;
  auto scan = [&]() {
    for (std::size_t i = next; i + 1 < mus.size(); ++i) {
      if (fv[i] == 0.0) {
        roots.push_back(mus[i]);
        continue;
      }
      if (fv[i] * fv[i + 1] < 0) refine_sign_change(mus[i], mus[i + 1], fv[i], fv[i + 1]);
      if (i >= 1 && fv[i - 1] * fv[i] > 0 && fv[i] * fv[i + 1] > 0 && std::abs(fv[i]) < std::abs(fv[i - 1]) &&
          std::abs(fv[i]) <= std::abs(fv[i + 1]))
        refine_dip(mus[i - 1], mus[i + 1], fv[i] > 0 ? 1.0 : -1.0);
    }
    next = mus.size() - 1;
  };

  scan();
  const int negatives = static_cast<int>(std::count_if(roots.begin(), roots.end(), [](double r) { return r < 0; }));
  if (negatives > half_dim())
    throw Error(ErrorCode::RootFindingStall, "more negative roots than the deficiency index allows");

  const int want = std::max(count, negatives);
  const double budget = kPi * (want + 2 * half_dim() + 8) + 10.0;
  double mu = 0.0;
  while (static_cast<int>(roots.size()) < want) {
    if (mu > budget) throw Error(ErrorCode::RootFindingStall, "positive scan exhausted before count roots");
    for (int i = 0; i < 256; ++i) {
      mu += (mu < 1.0) ? 0.02 : kPi / 16;
      mus.push_back(mu);
      fv.push_back(f(mu));
    }
    scan();
  }

  std::sort(roots.begin(), roots.end());
  for (std::size_t i = 1; i < roots.size(); ++i)
    if (roots[i] - roots[i - 1] <= 1e-13 * (1.0 + std::abs(roots[i])))
      throw Error(ErrorCode::MultiplicityAmbiguity, "coincident roots");
  roots.resize(want);

  EigenSystem out{dom, {}};
  out.pairs.reserve(roots.size());
  const int d = half_dim();
  for (double r : roots) {
    EigenPair p;
    p.lambda = detail::mu_to_lambda(r);
    const SolutionPair sp(p.lambda);
    const auto kc = kernel_coeffs(sp);
    const SecularFunction::Small kt = kernel_traces(sp);
    const SecularFunction::Small ck = dom.basis().adjoint() * space_->green_matrix() * kt;
    Eigen::VectorXcd alpha(d);
    if (d == 1) {
      alpha(0) = 1.0;
    } else {
      Eigen::JacobiSVD<SecularFunction::Small> svd(ck, Eigen::ComputeFullV);
      const auto& s = svd.singularValues();
      if (s(0) > 0 && s(d - 2) < 1e-8 * s(0))
        throw Error(ErrorCode::MultiplicityAmbiguity, "eigenspace dimension exceeds one");
      alpha = svd.matrixV().col(d - 1);
    }
    Eigen::Vector2cd coef = kc.cast<cplx>() * alpha;
    const RMat l2 = sp.l2_gram();
    const double nrm2 = (coef.adjoint() * l2.cast<cplx>() * coef)(0, 0).real();
    if (!(nrm2 > 0)) throw Error(ErrorCode::EigensolverFailure, "zero eigenfunction");
    p.l2_norm_raw = std::sqrt(nrm2);
    coef /= p.l2_norm_raw;

    CVec tr(4);
    for (int r4 = 0; r4 < 4; ++r4) {
      const double x = r4 < 2 ? 0.0 : 1.0;
      const int n = r4 % 2;
      tr(r4) = coef(0) * sp.eval(0, n, x) + coef(1) * sp.eval(1, n, x);
    }
    // Phase: first of psi'(0), psi(0), psi'(1), psi(1) that is not negligible becomes real positive.
    const double big = tr.cwiseAbs().maxCoeff();
    for (int idx : {1, 0, 3, 2}) {
      if (std::abs(tr(idx)) > 1e-8 * big) {
        const cplx ph = std::abs(tr(idx)) / tr(idx);
        coef *= ph;
        tr *= ph;
        break;
      }
    }
    p.coef = coef;
    p.traces = tr;
    p.ecoords = kind_ == BoundaryModel::Pinned ? CVec(tr.head(2)) : tr;
    out.pairs.push_back(std::move(p));
  }
  return out;
}

}  // namespace salab
