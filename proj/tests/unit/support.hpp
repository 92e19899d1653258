#pragma once

#include <catch_amalgamated.hpp>

#include "salab/domain_spec.hpp"
#include "salab/instability.hpp"

namespace salab::test {

inline const IntervalLaplacian& pinned() {
  static const IntervalLaplacian m = IntervalLaplacian::pinned();
  return m;
}

inline const IntervalLaplacian& full() {
  static const IntervalLaplacian m = IntervalLaplacian::full();
  return m;
}

inline LagrangianDomain line(const IntervalLaplacian& m, cplx a, cplx b) {
  CMat y(2, 1);
  y << a, b;
  return m.domain(y);
}

inline CVec vec(std::initializer_list<cplx> v) {
  CVec out(static_cast<int>(v.size()));
  int i = 0;
  for (cplx x : v) out(i++) = x;
  return out;
}

// Values from tests/oracle/derive.py (mpmath, 40 digits).
namespace oracle {
inline constexpr double pinned_g00 = 3.4845892136225502;
inline constexpr double pinned_g01 = 3.0854323495914433;
inline constexpr double pinned_g11 = 3.018976452885527;
inline constexpr double df_perp_u0 = 1.7375202021517698;
inline constexpr double neumann_sigma = 3.0854323495914433;
inline constexpr double robin51 = -24.995456292233193604;
inline constexpr double robin51_pos[2] = {14.365785676909478052, 52.566100514755881018};
inline constexpr double dive[3] = {-99.99999917553848645, -10000.0, -1000000.0};
inline constexpr double f_df_lambda[4] = {-10, -50, 5, 40};
inline constexpr double f_df[4] = {-6.4956822052164376, -18.261985669262272, 8.3818917762188657, -458.18562079511161};
inline constexpr double flow_lambda[4] = {-10, -100, -1000, -10000};
inline constexpr double pinned_flow[4] = {0.15215592007894829, 0.036869386113234121, 0.010823869935182551,
                                          0.0033465646882411234};
inline constexpr double full_flow[4] = {0.17059186433577611, 0.049735864930844242, 0.015699509863268353,
                                        0.0049607413883997162};
}  // namespace oracle

}  // namespace salab::test
