#pragma once

#include <cmath>
#include <vector>

#include "salab/error.hpp"
#include "salab/types.hpp"

namespace salab {

/// Gauss-Legendre rule mapped to [0, 1].
class GaussLegendre {
 public:
  explicit GaussLegendre(int order) : nodes_(order), weights_(order) {
    if (order < 1) throw Error(ErrorCode::QuadratureFailure, "order must be positive");
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      // Tricomi initial guess, then Newton on P_n.
      double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      bool converged = false;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) <= 1e-15) {
          converged = true;
          break;
        }
      }
      if (!converged) throw Error(ErrorCode::QuadratureFailure, "Legendre root iteration stalled");
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes_[i] = 0.5 * (1.0 - x);
      nodes_[n - 1 - i] = 0.5 * (1.0 + x);
      weights_[i] = weights_[n - 1 - i] = 0.5 * w;
    }
  }

  int order() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Integrate f over [a, b] split into `panels` equal pieces.
  template <class F>
  auto integrate(F&& f, double a = 0.0, double b = 1.0, int panels = 1) const {
    using R = decltype(f(0.0));
    R acc{};
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      const double lo = a + p * h;
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
        acc += (weights_[i] * h) * f(lo + h * nodes_[i]);
      }
    }
    return acc;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Panel count that resolves oscillation/decay of rate `rate` with a 32-point rule.
inline int panels_for_rate(double rate) {
  return 1 + static_cast<int>(std::ceil(std::abs(rate) / 8.0));
}

}  // namespace salab
