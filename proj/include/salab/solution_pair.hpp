#pragma once

// Real fundamental pair (g1, g2) of -u'' = lambda u on [0, 1].
//
// Three regimes share one orientation: in each, (g1, g2) = (c, s) M with det M > 0,
// where c = cos(sqrt(lambda) x) and s = sin(sqrt(lambda) x) / sqrt(lambda).
//   |lambda| <= 1 : (c, s) by power series, analytic through lambda = 0
//   lambda > 1    : (cos wx, sin wx)
//   lambda < -1   : (exp(-kx), exp(-k(1-x))), bounded for any k

#include <array>
#include <cmath>

#include "salab/quadrature.hpp"
#include "salab/types.hpp"

namespace salab {

class SolutionPair {
 public:
  enum class Regime { Series, Oscillatory, Exponential };

  explicit SolutionPair(double lambda) : lambda_(lambda) {
    if (std::abs(lambda) <= 1.0) {
      regime_ = Regime::Series;
    } else if (lambda > 0) {
      regime_ = Regime::Oscillatory;
      rate_ = std::sqrt(lambda);
    } else {
      regime_ = Regime::Exponential;
      rate_ = std::sqrt(-lambda);
    }
  }

  double lambda() const { return lambda_; }
  Regime regime() const { return regime_; }
  /// sqrt(|lambda|) outside the series regime, 0 inside.
  double rate() const { return rate_; }

  /// n-th derivative of g_j (j = 0, 1) at x.
  double eval(int j, int n, double x) const {
    const auto [v, d] = value_and_slope(j, x);
    const int half = n / 2;
    const double f = ipow(-lambda_, half);
    return (n % 2 == 0) ? f * v : f * d;
  }

  /// (g(0), g'(0), g(1), g'(1)) for g = g_j.
  std::array<double, 4> traces(int j) const {
    return {eval(j, 0, 0.0), eval(j, 1, 0.0), eval(j, 0, 1.0), eval(j, 1, 1.0)};
  }

  /// L2(0,1) Gram matrix of (g1, g2).
  RMat l2_gram() const {
    RMat g(2, 2);
    switch (regime_) {
      case Regime::Series: {
        static const GaussLegendre rule(32);
        for (int i = 0; i < 2; ++i)
          for (int j = i; j < 2; ++j)
            g(i, j) = g(j, i) = rule.integrate([&](double x) { return eval(i, 0, x) * eval(j, 0, x); });
        break;
      }
      case Regime::Oscillatory: {
        const double w = rate_;
        const double s2 = std::sin(2 * w) / (4 * w);
        const double sw = std::sin(w);
        g(0, 0) = 0.5 + s2;
        g(1, 1) = 0.5 - s2;
        g(0, 1) = g(1, 0) = sw * sw / (2 * w);
        break;
      }
      case Regime::Exponential: {
        const double k = rate_;
        g(0, 0) = g(1, 1) = -std::expm1(-2 * k) / (2 * k);
        g(0, 1) = g(1, 0) = std::exp(-k);
        break;
      }
    }
    return g;
  }

 private:
  static double ipow(double b, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  }

  std::array<double, 2> value_and_slope(int j, double x) const {
    switch (regime_) {
      case Regime::Series: {
        // c = sum (-lambda x^2)^k / (2k)!,  s = x sum (-lambda x^2)^k / (2k+1)!
        const double z = -lambda_ * x * x;
        double c = 0.0, s = 0.0, tc = 1.0, ts = 1.0;
        for (int k = 0; k < 30; ++k) {
          c += tc;
          s += ts;
          tc *= z / ((2.0 * k + 1) * (2.0 * k + 2));
          ts *= z / ((2.0 * k + 2) * (2.0 * k + 3));
        }
        s *= x;
        if (j == 0) return {c, -lambda_ * s};
        return {s, c};
      }
      case Regime::Oscillatory: {
        const double w = rate_;
        const double cw = std::cos(w * x), sw = std::sin(w * x);
        if (j == 0) return {cw, -w * sw};
        return {sw, w * cw};
      }
      case Regime::Exponential: {
        const double k = rate_;
        if (j == 0) {
          const double p = std::exp(-k * x);
          return {p, -k * p};
        }
        const double q = std::exp(-k * (1.0 - x));
        return {q, k * q};
      }
    }
    return {0.0, 0.0};
  }

  double lambda_;
  Regime regime_ = Regime::Series;
  double rate_ = 0.0;
};

}  // namespace salab
