#include "support.hpp"

using namespace salab;
using namespace salab::test;

// Invariants checked over random selfadjoint domains, seeds 1..24 in both models.

namespace {

const IntervalLaplacian& model_for(int which) { return which ? full() : pinned(); }

LagrangianDomain sample(const IntervalLaplacian& m, std::uint64_t seed) {
  const LagrangianDomain base = seed % 2 ? orthocomplement(m.friedrichs()) : m.friedrichs();
  return sample_sa(base, seed, 0.5 + 0.25 * static_cast<double>(seed % 8));
}

}  // namespace

TEST_CASE("sampled domains are selfadjoint and fixed by the adjoint", "[property]") {
  const int which = GENERATE(0, 1);
  const std::uint64_t seed = GENERATE(range(1, 25));
  const auto& m = model_for(which);
  const LagrangianDomain d = sample(m, seed);
  CHECK(d.dim() == m.half_dim());
  CHECK(is_selfadjoint(d).residual < 1e-10);
  CHECK(gap(adjoint_domain(d), d) < 1e-10);
  const LagrangianDomain p = orthocomplement(d);
  CHECK(is_selfadjoint(p).residual < 1e-10);
  CHECK(gap(orthocomplement(p), d) < 1e-10);
  // D^perp = J D
  CHECK(gap(p, Subspace(m.space(), m.space()->jmat() * d.basis())) < 1e-10);
}

TEST_CASE("chart coordinates round-trip", "[property]") {
  const int which = GENERATE(0, 1);
  const std::uint64_t seed = GENERATE(range(1, 25));
  const auto& m = model_for(which);
  std::mt19937_64 rng(seed);
  const LagrangianDomain base = sample(m, seed + 100);
  const CMat s = random_hermitian(m.half_dim(), rng, 3.0);
  const LagrangianDomain g = graph_domain({base, s});
  CHECK(op_norm(chart_of(g, base).sigma - s) < 1e-9 * std::max(1.0, op_norm(s)));
  CHECK(gap(graph_domain(chart_of(g, base)), g) < 1e-10);
}

TEST_CASE("gap is a metric on domains", "[property]") {
  const int which = GENERATE(0, 1);
  const std::uint64_t seed = GENERATE(range(1, 25));
  const auto& m = model_for(which);
  const LagrangianDomain a = sample(m, seed), b = sample(m, seed + 1), c = sample(m, seed + 2);
  const double ab = gap(a, b);
  CHECK(ab >= 0.0);
  CHECK(ab <= 1.0 + 1e-14);
  CHECK(std::abs(ab - gap(b, a)) < 1e-12);
  CHECK(gap(a, c) <= ab + gap(b, c) + 1e-12);
}

TEST_CASE("at most d eigenvalues lie below the Friedrichs bound", "[property]") {
  const int which = GENERATE(0, 1);
  const std::uint64_t seed = GENERATE(range(1, 25));
  const auto& m = model_for(which);
  const LagrangianDomain d = sample(m, seed);
  const EigenSystem es = m.eigen_system(d, m.half_dim() + 1);
  CHECK(es.pairs.back().lambda >= m.lower_bound() * (1 - 1e-9));
  for (std::size_t k = 1; k < es.pairs.size(); ++k) CHECK(es.pairs[k].lambda >= es.pairs[k - 1].lambda);
  // eigenvalues of D are exactly where K_lambda meets D
  for (const auto& p : es.pairs) {
    CHECK(intersect(d, m.kernel_direct(p.lambda), 1e-6).dim() >= 1);
  }
}

TEST_CASE("F is Hermitian, increasing below the spectrum, and K_lambda is domain independent", "[property]") {
  const int which = GENERATE(0, 1);
  const std::uint64_t seed = GENERATE(range(1, 25));
  const auto& m = model_for(which);
  const LagrangianDomain d = sample(m, seed);
  const LagrangianDomain perp = orthocomplement(d);
  const double low = m.eigen_system(d, 1).pairs[0].lambda;
  const double l1 = std::min(low, 0.0) - 20.0, l2 = std::min(low, 0.0) - 5.0;
  const FMatrix f1 = f_matrix_direct(m, d, perp, l1);
  const FMatrix f2 = f_matrix_direct(m, d, perp, l2);
  CHECK(f1.hermitian_residual < 1e-9 * std::max(1.0, op_norm(f1.matrix)));
  CHECK(f2.hermitian_residual < 1e-9 * std::max(1.0, op_norm(f2.matrix)));
  const CMat diff = f2.matrix - f1.matrix;
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (diff + diff.adjoint()));
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  for (double lam : {l1, l2, -300.0}) {
    const Subspace k = kernel_via_f(m, d, lam);
    CHECK(gap(k, m.kernel_direct(lam)) < 1e-8);
    CHECK(is_selfadjoint(k).residual < 1e-9);
  }
}

TEST_CASE("the kernel flow approaches D_F monotonically", "[property]") {
  const int which = GENERATE(0, 1);
  const std::uint64_t seed = GENERATE(range(1, 9));
  const auto& m = model_for(which);
  const auto flow = kernel_flow(m, sample(m, seed), {-10.0, -31.6, -100.0, -316.0, -1e3, -3.16e3, -1e4});
  double prev = 2.0;
  for (const auto& p : flow) {
    REQUIRE(p.ok);
    CHECK(p.gap < prev);
    prev = p.gap;
  }
}
