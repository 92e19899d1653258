#pragma once

// Independent second-order discretization of A_D on a uniform grid, for tests only.
//
// A selfadjoint condition is rewritten with boundary values v = (u(0)[, u(1)]) and outward
// derivatives n = (-u'(0)[, u'(1)]): v = U z ranges over a subspace and the component of n
// in that subspace equals L z with L Hermitian. The form int |u'|^2 - <L z, z> is discretized
// with piecewise-linear stiffness and lumped mass, which coincides with the ghost-point scheme.
// Unknowns are ordered z, then interior nodes 1, n-1, 2, n-2, ... so the matrix has bandwidth <= 3.

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <complex>
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include "salab/realization.hpp"

namespace salab {

class FdOracle {
 public:
  FdOracle(const IntervalLaplacian& model, const LagrangianDomain& dom, int n) : n_(n) {
    if (n < 100) throw Error(ErrorCode::DimensionMismatch, "oracle grid needs n >= 100");
    const bool full = model.kind() == BoundaryModel::Full;
    const CMat& y = dom.basis();
    const int d = dom.dim();
    const int p = full ? 2 : 1;
    CMat vb(p, d), nb(p, d);
    vb.row(0) = y.row(0);
    nb.row(0) = -y.row(1);
    if (full) {
      vb.row(1) = y.row(2);
      nb.row(1) = y.row(3);
    }
    Eigen::JacobiSVD<CMat> svd(vb, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVec& s = svd.singularValues();
    r_ = 0;
    while (r_ < s.size() && s(r_) > 1e-10) ++r_;
    u_ = svd.matrixU().leftCols(r_);
    if (r_ > 0) {
      const CMat w = svd.matrixV().leftCols(r_);
      const RVec sinv = s.head(r_).cwiseInverse();
      lmat_ = u_.adjoint() * nb * w * sinv.asDiagonal();
      lmat_ = 0.5 * (lmat_ + lmat_.adjoint());
    }

    // Position of each grid node among the unknowns (-1 marks a boundary node).
    pos_.assign(n + 1, -1);
    int next = r_;
    for (int lo = 1, hi = n - 1; lo <= hi; ++lo, --hi) {
      pos_[lo] = next++;
      if (hi != lo) pos_[hi] = next++;
    }
    size_ = next;
    boundary_col_.assign(n + 1, -1);
    boundary_col_[0] = 0;
    if (full) boundary_col_[n] = 1;
    assemble();
  }

  int size() const { return size_; }
  int bandwidth() const { return kd_; }
  const Eigen::SparseMatrix<cplx>& stiffness() const { return k_; }

  /// Lowest `count` eigenvalues, ascending.
  RVec eigenvalues(int count) const {
    const int nn = size_;
    const int kd = kd_;
    const int ldab = kd + 1;
    std::vector<cplx> ab(static_cast<std::size_t>(ldab) * nn, cplx(0.0));
    for (int j = 0; j < k_.outerSize(); ++j) {
      for (Eigen::SparseMatrix<cplx>::InnerIterator it(k_, j); it; ++it) {
        const int i = static_cast<int>(it.row());
        if (i > j) continue;
        const cplx v = it.value() / std::sqrt(mass_[i] * mass_[j]);
        ab[static_cast<std::size_t>(j) * ldab + (kd + i - j)] = v;
      }
    }
    std::vector<double> w(nn);
    std::vector<lapack_int> ifail(nn);
    lapack_complex_double q(0.0), z(0.0);
    lapack_int m = 0;
    const lapack_int info = LAPACKE_zhbevx(LAPACK_COL_MAJOR, 'N', 'I', 'U', nn, kd, ab.data(), ldab, &q, 1, 0.0,
                                           0.0, 1, count, 0.0, &m, w.data(), &z, 1, ifail.data());
    if (info != 0 || m != count) throw Error(ErrorCode::EigensolverFailure, "zhbevx failed");
    RVec out(count);
    for (int i = 0; i < count; ++i) out(i) = w[i];
    return out;
  }

  /// Solves (A_D - lambda) w = f weakly; returns nodal values w(x_i), i = 0..n.
  CVec resolvent_solve(double lambda, const std::function<cplx(double)>& f) const {
    Eigen::SparseMatrix<cplx> a = k_;
    CVec rhs = CVec::Zero(size_);
    for (int i = 0; i < size_; ++i) a.coeffRef(i, i) -= lambda * mass_[i];
    const double h = 1.0 / n_;
    for (int node = 0; node <= n_; ++node) {
      const cplx fv = f(node * h);
      for (const auto& [col, c] : node_coeffs(node)) {
        const double mw = (node == 0 || node == n_) ? 0.5 * h : h;
        rhs(col) += std::conj(c) * mw * fv;
      }
    }
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu(a);
    if (lu.info() != Eigen::Success) throw Error(ErrorCode::EigensolverFailure, "sparse LU failed");
    const CVec x = lu.solve(rhs);
    CVec w(n_ + 1);
    for (int node = 0; node <= n_; ++node) {
      cplx acc = 0.0;
      for (const auto& [col, c] : node_coeffs(node)) acc += c * x(col);
      w(node) = acc;
    }
    return w;
  }

 private:
  std::vector<std::pair<int, cplx>> node_coeffs(int node) const {
    std::vector<std::pair<int, cplx>> out;
    if (pos_[node] >= 0) {
      out.emplace_back(pos_[node], 1.0);
    } else if (boundary_col_[node] >= 0) {
      for (int c = 0; c < r_; ++c) {
        const cplx v = u_(boundary_col_[node], c);
        if (v != cplx(0.0)) out.emplace_back(c, v);
      }
    }
    return out;
  }

  void assemble() {
    const double h = 1.0 / n_;
    std::vector<Eigen::Triplet<cplx>> t;
    for (int i = 0; i < n_; ++i) {
      // |u_{i+1} - u_i|^2 / h
      std::vector<std::pair<int, cplx>> c = node_coeffs(i + 1);
      for (auto [col, v] : node_coeffs(i)) c.emplace_back(col, -v);
      for (const auto& [ca, va] : c)
        for (const auto& [cb, vb] : c) t.emplace_back(ca, cb, std::conj(va) * vb / h);
    }
    for (int a = 0; a < r_; ++a)
      for (int b = 0; b < r_; ++b) t.emplace_back(a, b, -lmat_(a, b));
    k_.resize(size_, size_);
    k_.setFromTriplets(t.begin(), t.end());
    k_.makeCompressed();
    mass_.assign(size_, h);
    for (int a = 0; a < r_; ++a) mass_[a] = 0.5 * h;
    kd_ = 0;
    for (int j = 0; j < k_.outerSize(); ++j)
      for (Eigen::SparseMatrix<cplx>::InnerIterator it(k_, j); it; ++it)
        kd_ = std::max(kd_, static_cast<int>(std::abs(it.row() - j)));
  }

  int n_;
  int r_ = 0;
  CMat u_;
  CMat lmat_;
  std::vector<int> pos_;
  std::vector<int> boundary_col_;
  int size_ = 0;
  int kd_ = 0;
  Eigen::SparseMatrix<cplx> k_;
  std::vector<double> mass_;
};

inline RVec oracle_spectrum_fd(const IntervalLaplacian& model, const LagrangianDomain& dom, int n, int count) {
  return FdOracle(model, dom, n).eigenvalues(count);
}

}  // namespace salab
