#pragma once

// Finite-dimensional boundary-value geometry: the extension space E with its
// A-inner product and almost complex structure J = A|_E, the Green form,
// subspaces, Lagrangian (selfadjoint) domains, graph charts and the gap metric.
//
// Coordinates: vectors are columns of coefficients in a fixed basis of E.
// Inner products are linear in the first argument: (u, v)_A = v^H G u.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "salab/error.hpp"
#include "salab/types.hpp"

namespace salab {

inline double op_norm(const CMat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(m);
  return svd.singularValues()(0);
}

inline double min_singular(const CMat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

class ExtensionSpace;
using SpacePtr = std::shared_ptr<const ExtensionSpace>;

/// The 2d-dimensional space E together with its Gram matrix and the matrix of A|_E.
class ExtensionSpace {
 public:
  struct Diagnostics {
    double almost_complex_residual = 0.0;  // ||J^2 + I||
    double isometry_residual = 0.0;        // ||J^H G J - G||
    double green_skew_residual = 0.0;      // ||Omega + Omega^H||
    double green_min_singular = 0.0;       // nondegeneracy margin of the Green form
  };

  /// Checks every structural invariant and returns a shared immutable space.
  static SpacePtr validate(const CMat& gram, const CMat& jmat, double tol = kStructuralTol) {
    if (gram.rows() != gram.cols() || jmat.rows() != jmat.cols() || gram.rows() != jmat.rows())
      throw Error(ErrorCode::DimensionMismatch, "gram and jmat must be square of equal size");
    if (gram.rows() == 0 || gram.rows() % 2 != 0)
      throw Error(ErrorCode::DimensionMismatch, "dim E must be even and positive");
    const double gscale = std::max(1.0, gram.cwiseAbs().maxCoeff());
    if (hermitian_residual(gram) > tol * gscale)
      throw Error(ErrorCode::NotHermitian, "gram is not Hermitian");

    std::shared_ptr<ExtensionSpace> s(new ExtensionSpace);
    s->gram_ = 0.5 * (gram + gram.adjoint());
    s->jmat_ = jmat;
    Eigen::LLT<CMat> llt(s->gram_);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::NotHermitian, "gram is not positive definite");
    s->whitener_ = llt.matrixU();
    s->unwhitener_ = s->whitener_.triangularView<Eigen::Upper>().solve(
        CMat::Identity(gram.rows(), gram.cols()));

    const auto n = gram.rows();
    auto& dg = s->diag_;
    dg.almost_complex_residual = op_norm(jmat * jmat + CMat::Identity(n, n));
    if (dg.almost_complex_residual > tol)
      throw Error(ErrorCode::NotAlmostComplex,
                  "||J^2 + I|| = " + std::to_string(dg.almost_complex_residual));
    dg.isometry_residual = op_norm(jmat.adjoint() * s->gram_ * jmat - s->gram_);
    if (dg.isometry_residual > tol * gscale)
      throw Error(ErrorCode::NotIsometry,
                  "||J^H G J - G|| = " + std::to_string(dg.isometry_residual));
    s->omega_ = -jmat.adjoint() * s->gram_;
    dg.green_skew_residual = op_norm(s->omega_ + s->omega_.adjoint());
    dg.green_min_singular = min_singular(s->omega_);
    if (dg.green_min_singular <= tol)
      throw Error(ErrorCode::DegenerateGreenForm, "Green form is degenerate");
    return s;
  }

  int dim() const { return static_cast<int>(gram_.rows()); }
  int half_dim() const { return dim() / 2; }
  const CMat& gram() const { return gram_; }
  const CMat& jmat() const { return jmat_; }
  /// Upper-triangular W with G = W^H W, so (u, v)_A = (W v)^H (W u).
  const CMat& whitener() const { return whitener_; }
  const CMat& unwhitener() const { return unwhitener_; }
  /// Omega with green_form(u, v) = v^H Omega u.
  const CMat& green_matrix() const { return omega_; }
  const Diagnostics& diagnostics() const { return diag_; }

  cplx inner(const CVec& u, const CVec& v) const {
    check(u);
    check(v);
    return v.dot(gram_ * u);
  }
  double norm(const CVec& u) const { return std::sqrt(std::max(0.0, inner(u, u).real())); }

  /// [u, v]_A = -(u, Jv)_A.
  cplx green_form(const CVec& u, const CVec& v) const {
    check(u);
    check(v);
    return -inner(u, jmat_ * v);
  }

 private:
  ExtensionSpace() = default;

  void check(const CVec& u) const {
    if (u.size() != gram_.rows())
      throw Error(ErrorCode::DimensionMismatch, "coordinate vector has wrong length");
  }

  CMat gram_, jmat_, whitener_, unwhitener_, omega_;
  Diagnostics diag_;
};

inline cplx green_form(const ExtensionSpace& space, const CVec& u, const CVec& v) {
  return space.green_form(u, v);
}

/// A subspace of E stored with a gram-orthonormal basis.
class Subspace {
 public:
  Subspace(SpacePtr space, const CMat& coeffs, double rank_tol = kRankTol)
      : space_(std::move(space)), coeffs_(coeffs) {
    if (coeffs.rows() != space_->dim())
      throw Error(ErrorCode::DimensionMismatch, "basis rows must equal dim E");
    basis_ = orthonormalize(coeffs, rank_tol);
  }

  static Subspace zero(SpacePtr space) {
    const int n = space->dim();
    return Subspace(std::move(space), CMat(n, 0));
  }

  int dim() const { return static_cast<int>(basis_.cols()); }
  const SpacePtr& space() const { return space_; }
  const ExtensionSpace& parent() const { return *space_; }
  /// The basis as supplied by the caller.
  const CMat& coeffs() const { return coeffs_; }
  /// Canonical gram-orthonormal representative.
  const CMat& basis() const { return basis_; }
  /// Basis in whitened coordinates; columns are Euclidean-orthonormal.
  CMat whitened() const { return space_->whitener() * basis_; }
  /// A-orthogonal projector onto the subspace, in coordinates.
  CMat projector() const { return basis_ * basis_.adjoint() * space_->gram(); }
  CVec project(const CVec& u) const { return basis_ * (basis_.adjoint() * (space_->gram() * u)); }

 private:
  // Modified Gram-Schmidt in the gram inner product, with one reorthogonalization pass.
  CMat orthonormalize(const CMat& x, double rank_tol) const {
    const CMat& g = space_->gram();
    CMat q(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      CVec v = x.col(j);
      const double orig = std::sqrt(std::max(0.0, v.dot(g * v).real()));
      if (orig == 0.0) throw Error(ErrorCode::RankDeficient, "zero basis column");
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index i = 0; i < j; ++i) {
          const cplx r = q.col(i).dot(g * v);
          v -= r * q.col(i);
        }
      }
      const double nv = std::sqrt(std::max(0.0, v.dot(g * v).real()));
      if (nv <= rank_tol * orig)
        throw Error(ErrorCode::RankDeficient, "basis columns are linearly dependent");
      q.col(j) = v / nv;
    }
    return q;
  }

  SpacePtr space_;
  CMat coeffs_;
  CMat basis_;
};

struct SelfAdjointCheck {
  bool selfadjoint = false;
  double residual = 0.0;  // max |[u_i, u_j]_A| over orthonormal basis pairs
};

/// Isotropy test: D is selfadjoint iff dim D = d and the Green form vanishes on D x D.
inline SelfAdjointCheck is_selfadjoint(const Subspace& d, double tol = kStructuralTol) {
  if (d.dim() != d.parent().half_dim())
    throw Error(ErrorCode::WrongRank, "selfadjoint domains have dimension d");
  const CMat& q = d.basis();
  const CMat m = q.adjoint() * d.parent().green_matrix() * q;
  SelfAdjointCheck out;
  out.residual = m.cwiseAbs().maxCoeff();
  out.selfadjoint = out.residual < tol;
  return out;
}

/// A d-dimensional isotropic subspace, i.e. an element of the selfadjoint manifold.
class LagrangianDomain {
 public:
  explicit LagrangianDomain(Subspace s, double tol = kLagrangianTol) : sub_(std::move(s)) {
    const auto chk = is_selfadjoint(sub_, tol);
    if (!chk.selfadjoint)
      throw Error(ErrorCode::NotLagrangian,
                  "Green form residual " + std::to_string(chk.residual));
    residual_ = chk.residual;
  }
  LagrangianDomain(SpacePtr space, const CMat& coeffs, double tol = kLagrangianTol)
      : LagrangianDomain(Subspace(std::move(space), coeffs), tol) {}

  const Subspace& subspace() const { return sub_; }
  operator const Subspace&() const { return sub_; }
  const CMat& basis() const { return sub_.basis(); }
  int dim() const { return sub_.dim(); }
  const SpacePtr& space() const { return sub_.space(); }
  const ExtensionSpace& parent() const { return sub_.parent(); }
  double isotropy_residual() const { return residual_; }

 private:
  Subspace sub_;
  double residual_ = 0.0;
};

/// A-orthogonal complement.
inline Subspace orthocomplement(const Subspace& d) {
  const auto& sp = d.parent();
  const int n = sp.dim();
  const int k = d.dim();
  CMat comp_w;
  if (k == 0) {
    comp_w = CMat::Identity(n, n);
  } else {
    Eigen::HouseholderQR<CMat> qr(d.whitened());
    const CMat full = qr.householderQ() * CMat::Identity(n, n);
    comp_w = full.rightCols(n - k);
  }
  return Subspace(d.space(), sp.unwhitener() * comp_w);
}

inline LagrangianDomain orthocomplement(const LagrangianDomain& d) {
  return LagrangianDomain(orthocomplement(d.subspace()));
}

/// Finite part of the adjoint domain: A(D^perp).
inline Subspace adjoint_domain(const Subspace& d) {
  const Subspace perp = orthocomplement(d);
  return Subspace(d.space(), d.parent().jmat() * perp.basis());
}

/// Cosines of the principal angles (descending), computed in the A-metric.
inline RVec principal_cosines(const Subspace& a, const Subspace& b) {
  if (a.dim() == 0 || b.dim() == 0) return RVec(0);
  Eigen::JacobiSVD<CMat> svd(a.whitened().adjoint() * b.whitened());
  return svd.singularValues().cwiseMin(1.0);
}

/// Gap metric ||P_a - P_b|| for equal-rank subspaces.
/// Uses ||P_a - P_b|| = max(||(I - P_b) P_a||, ||(I - P_a) P_b||), which is symmetric by form.
inline double gap(const Subspace& a, const Subspace& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::RankMismatch, "gap needs equal ranks");
  if (a.dim() == 0) return 0.0;
  const CMat wa = a.whitened(), wb = b.whitened();
  const CMat ra = wa - wb * (wb.adjoint() * wa);
  const CMat rb = wb - wa * (wa.adjoint() * wb);
  return std::min(1.0, std::max(op_norm(ra), op_norm(rb)));
}

/// Sine of the largest principal angle; equals gap() for equal ranks.
inline double largest_angle_sine(const Subspace& a, const Subspace& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::RankMismatch, "equal ranks required");
  if (a.dim() == 0) return 0.0;
  const RVec c = principal_cosines(a, b);
  const double cmin = c(c.size() - 1);
  return std::sqrt(std::max(0.0, 1.0 - cmin * cmin));
}

/// Numerical intersection: directions whose principal-angle cosine exceeds 1 - tol.
inline Subspace intersect(const Subspace& a, const Subspace& b, double tol = kIntersectTol) {
  if (a.space() != b.space() && a.space()->dim() != b.space()->dim())
    throw Error(ErrorCode::DimensionMismatch, "subspaces live in different spaces");
  if (a.dim() == 0 || b.dim() == 0) return Subspace::zero(a.space());
  Eigen::JacobiSVD<CMat> svd(a.whitened().adjoint() * b.whitened(), Eigen::ComputeFullU);
  const RVec& s = svd.singularValues();
  int r = 0;
  while (r < s.size() && s(r) > 1.0 - tol) ++r;
  if (r == 0) return Subspace::zero(a.space());
  return Subspace(a.space(), a.basis() * svd.matrixU().leftCols(r));
}

/// Chart over a selfadjoint base: sigma is the matrix of AT on the orthonormal basis of base.
struct GraphChart {
  LagrangianDomain base;
  CMat sigma;
};

/// graph T = {u + Tu : u in base} with T = -J (sigma acting on base).
inline LagrangianDomain graph_domain(const GraphChart& chart, double tol = kLagrangianTol) {
  const int d = chart.base.dim();
  if (chart.sigma.rows() != d || chart.sigma.cols() != d)
    throw Error(ErrorCode::DimensionMismatch, "sigma must be d x d");
  if (hermitian_residual(chart.sigma) > kStructuralTol * std::max(1.0, op_norm(chart.sigma)))
    throw Error(ErrorCode::NotHermitian, "chart sigma is not Hermitian");
  const CMat& q = chart.base.basis();
  const CMat x = q - chart.base.parent().jmat() * (q * chart.sigma);
  return LagrangianDomain(Subspace(chart.base.space(), x), tol);
}

/// Inverse of graph_domain: recovers sigma with graph_domain({base, sigma}) = D.
inline GraphChart chart_of(const Subspace& d, const LagrangianDomain& base,
                           double tol = kRankTol) {
  if (d.dim() != base.dim()) throw Error(ErrorCode::WrongRank, "chart needs dim D = d");
  const auto& sp = base.parent();
  const CMat& q = base.basis();
  const CMat jq = sp.jmat() * q;
  const CMat a = q.adjoint() * sp.gram() * d.basis();
  const CMat b = jq.adjoint() * sp.gram() * d.basis();
  if (min_singular(a) <= tol)
    throw Error(ErrorCode::OutOfChart, "projection of D onto the chart base is singular");
  const CMat sigma = -b * a.inverse();
  return GraphChart{base, sigma};
}

inline CMat random_hermitian(int d, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat s(d, d);
  for (int i = 0; i < d; ++i) {
    s(i, i) = cplx(g(rng), 0.0);
    for (int j = i + 1; j < d; ++j) {
      const double re = g(rng), im = g(rng);
      s(i, j) = cplx(re, im) / std::sqrt(2.0);
      s(j, i) = std::conj(s(i, j));
    }
  }
  return scale * s;
}

/// Random element of the chart around `base`; deterministic per seed.
inline LagrangianDomain sample_sa(const LagrangianDomain& base, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  return graph_domain(GraphChart{base, random_hermitian(base.dim(), rng, scale)});
}

/// The +i and -i eigenspaces of J, each of dimension d.
inline std::pair<Subspace, Subspace> cayley_split(const SpacePtr& space) {
  const int n = space->dim();
  const int d = space->half_dim();
  Eigen::ComplexEigenSolver<CMat> es(space->jmat());
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::EigensolverFailure, "eigendecomposition of J failed");
  CMat plus(n, 0), minus(n, 0);
  for (int i = 0; i < n; ++i) {
    const cplx ev = es.eigenvalues()(i);
    CMat* target = nullptr;
    if (std::abs(ev - cplx(0, 1)) < 1e-6) target = &plus;
    else if (std::abs(ev - cplx(0, -1)) < 1e-6) target = &minus;
    else throw Error(ErrorCode::EigensolverFailure, "J has an eigenvalue other than +-i");
    target->conservativeResize(n, target->cols() + 1);
    target->col(target->cols() - 1) = es.eigenvectors().col(i);
  }
  if (plus.cols() != d || minus.cols() != d)
    throw Error(ErrorCode::EigensolverFailure, "eigenspaces of J are not both d-dimensional");
  return {Subspace(space, plus), Subspace(space, minus)};
}

}  // namespace salab
