#include "support.hpp"

using namespace salab;
using namespace salab::test;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

bool config_error(const IntervalLaplacian& m, const std::string& s) {
  try {
    parse_domain(m, s);
  } catch (const Error& e) {
    return e.code() == ErrorCode::ConfigError;
  }
  return false;
}

}  // namespace

TEST_CASE("complex literals", "[domain]") {
  CHECK(parse_complex("2.5") == cplx(2.5, 0.0));
  CHECK(parse_complex("1-2i") == cplx(1.0, -2.0));
  CHECK(parse_complex("-i") == cplx(0.0, -1.0));
  CHECK(parse_complex("i") == cplx(0.0, 1.0));
  CHECK(parse_complex(" 3j ") == cplx(0.0, 3.0));
  CHECK(parse_complex("1e-3+2e-2i") == cplx(1e-3, 2e-2));
  CHECK(parse_complex("-1.5E+2-1e1i") == cplx(-150.0, -10.0));
  CHECK_THROWS_AS(parse_complex(""), Error);
  CHECK_THROWS_AS(parse_complex("1+x"), Error);
  CHECK_THROWS_AS(parse_complex("abc"), Error);
}

TEST_CASE("named domains", "[domain]") {
  CHECK(gap(parse_domain(pinned(), "dirichlet"), pinned().friedrichs()) < 1e-14);
  CHECK(gap(parse_domain(pinned(), " Friedrichs "), pinned().friedrichs()) < 1e-14);
  CHECK(gap(parse_domain(pinned(), "neumann"), line(pinned(), 1.0, 0.0)) < 1e-14);
  CHECK(gap(parse_domain(full(), "dirichlet"), full().friedrichs()) < 1e-14);

  const EigenSystem dn = full().eigen_system(parse_domain(full(), "dirichlet-neumann"), 2);
  CHECK_THAT(dn.pairs[0].lambda, WithinRel(0.25 * kPi * kPi, 1e-10));
  CHECK_THAT(dn.pairs[1].lambda, WithinRel(2.25 * kPi * kPi, 1e-10));
  const EigenSystem nd = full().eigen_system(parse_domain(full(), "neumann-dirichlet"), 1);
  CHECK_THAT(nd.pairs[0].lambda, WithinRel(0.25 * kPi * kPi, 1e-10));
  const EigenSystem nn = full().eigen_system(parse_domain(full(), "neumann"), 2);
  CHECK_THAT(nn.pairs[0].lambda, WithinAbs(0.0, 1e-9));
  CHECK_THAT(nn.pairs[1].lambda, WithinRel(kPi * kPi, 1e-10));

  CHECK(config_error(pinned(), "dirichlet-neumann"));
  CHECK(config_error(pinned(), "periodic"));
}

TEST_CASE("robin", "[domain]") {
  const EigenSystem r = pinned().eigen_system(parse_domain(pinned(), "robin(5,1)"), 2);
  CHECK_THAT(r.pairs[0].lambda, WithinRel(oracle::robin51, 1e-12));
  CHECK_THAT(r.pairs[1].lambda, WithinRel(oracle::robin51_pos[0], 1e-12));
  CHECK(gap(parse_domain(pinned(), "robin(0, 1)"), line(pinned(), 1.0, 0.0)) < 1e-14);
  CHECK(gap(parse_domain(pinned(), "robin(1,0)"), pinned().friedrichs()) < 1e-14);
  // full model mirrors the condition at the right end: a symmetric problem
  const EigenSystem f = full().eigen_system(parse_domain(full(), "robin(5,1)"), 2);
  CHECK(f.pairs[0].lambda < 0);
  CHECK(f.pairs[1].lambda < 0);
  CHECK(config_error(pinned(), "robin(0,0)"));
  CHECK(config_error(pinned(), "robin(1)"));
  CHECK(config_error(pinned(), "robin(1,2,3)"));
  CHECK(config_error(pinned(), "robin(1,x)"));
  CHECK(config_error(pinned(), "robin(1,2"));
}

TEST_CASE("perp, trace-matrix and chart", "[domain]") {
  CHECK(gap(parse_domain(pinned(), "perp(dirichlet)"), orthocomplement(pinned().friedrichs())) < 1e-14);
  CHECK(gap(parse_domain(pinned(), "perp(perp(neumann))"), line(pinned(), 1.0, 0.0)) < 1e-12);
  CHECK(gap(parse_domain(pinned(), "trace-matrix(1,-5)"), line(pinned(), 1.0, -5.0)) < 1e-14);
  CHECK(gap(parse_domain(full(), "trace-matrix(0,1,0,0;0,0,0,1)"), full().friedrichs()) < 1e-14);

  const std::string sigma = std::to_string(oracle::neumann_sigma);
  CHECK(gap(parse_domain(pinned(), "chart(perp(friedrichs), " + sigma + ")"), line(pinned(), 1.0, 0.0)) < 1e-6);
  const LagrangianDomain c = parse_domain(full(), "chart(dirichlet, 1,2-i;2+i,-3)");
  CMat s(2, 2);
  s << 1.0, cplx(2.0, -1.0), cplx(2.0, 1.0), -3.0;
  CHECK(op_norm(chart_of(c, full().friedrichs()).sigma - s) < 1e-10);

  CHECK(config_error(pinned(), "trace-matrix(-1i,1)"));
  CHECK(config_error(pinned(), "trace-matrix(1,2,3)"));
  CHECK(config_error(full(), "trace-matrix(1,0,0,0;0,1)"));
  CHECK(config_error(full(), "chart(dirichlet, 1,2;3,4)"));
  CHECK(config_error(pinned(), "chart(dirichlet)"));
  CHECK(config_error(pinned(), "perp(dirichlet"));
  CHECK(config_error(pinned(), "perp(dirichlet))"));
  try {
    parse_domain(pinned(), "trace-matrix(-1i,1)");
  } catch (const Error& e) {
    CHECK_THAT(e.what(), ContainsSubstring("trace-matrix(-1i,1)"));
    CHECK_THAT(e.what(), ContainsSubstring("NotLagrangian"));
  }
}
