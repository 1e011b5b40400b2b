#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "causalrt/metrics.hpp"
#include "causalrt/rng.hpp"

using namespace causalrt;

namespace {

RealMatrix column_of(const std::vector<double>& v) {
  RealMatrix m(static_cast<std::int64_t>(v.size()), 1);
  m.set_column(0, v);
  return m;
}

}  // namespace

TEST_CASE("digamma reference values") {
  // psi(1) = -euler_gamma, psi(1/2) = -euler_gamma - 2 ln 2,
  // psi(6) = 137/60 - euler_gamma
  const double eg = 0.5772156649015329;
  CHECK(digamma(1.0) == doctest::Approx(-eg).epsilon(1e-10));
  CHECK(digamma(0.5) == doctest::Approx(-eg - 2.0 * std::log(2.0)).epsilon(1e-10));
  CHECK(digamma(6.0) == doctest::Approx(137.0 / 60.0 - eg).epsilon(1e-10));
  // recurrence psi(x+1) = psi(x) + 1/x at an awkward argument
  CHECK(digamma(3.25) == doctest::Approx(digamma(2.25) + 1.0 / 2.25).epsilon(1e-10));
  CHECK_THROWS_AS(digamma(0.0), std::invalid_argument);
  CHECK_THROWS_AS(digamma(-1.0), std::invalid_argument);
}

TEST_CASE("delta_u is scale and location blind but phase aware") {
  Rng rng(2);
  std::vector<double> u(300);
  for (auto& v : u) v = rng.normal();
  // affine reparameterizations vanish
  std::vector<double> scaled(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) scaled[i] = 4.0 * u[i] - 7.0;
  CHECK(delta_u(scaled, u) == doctest::Approx(0.0).epsilon(1e-20));
  CHECK(delta_u(u, u) == 0.0);
  // a sign flip is maximally penalized, not forgiven
  std::vector<double> flipped(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) flipped[i] = -u[i];
  CHECK(delta_u(flipped, u) > 1.0);
  // unrelated noise lands near 2 (independent standardized vectors)
  std::vector<double> other(u.size());
  for (auto& v : other) v = rng.normal();
  CHECK(delta_u(other, u) == doctest::Approx(2.0).epsilon(0.25));
  // degenerate inputs are refused
  std::vector<double> flat(u.size(), 3.0);
  CHECK_THROWS_AS(delta_u(flat, u), std::invalid_argument);
  CHECK_THROWS_AS(delta_u({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("cic score composes the two errors") {
  CHECK(cic_score(0.0, 0.0) == 1.0);
  CHECK(cic_score(0.5, 0.25) == doctest::Approx(std::exp(-0.75)).epsilon(1e-12));
  CHECK(cic_score(50.0, 50.0) < 1e-8);
}

TEST_CASE("ksg estimates gaussian mutual information") {
  // correlated pair: I = -0.5 ln(1 - rho^2)
  const double rho = 0.6;
  const double truth = -0.5 * std::log(1.0 - rho * rho);
  Rng rng(11);
  const int n = 1500;
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    const double a = rng.normal();
    const double b = rng.normal();
    x[i] = a;
    y[i] = rho * a + std::sqrt(1.0 - rho * rho) * b;
  }
  const double est = ksg_mi(column_of(x), column_of(y), 5);
  CHECK(est == doctest::Approx(truth).epsilon(0.35));
  CHECK(std::abs(est - truth) < 0.08);

  // independent pair sits near zero
  std::vector<double> z(n);
  for (auto& v : z) v = rng.normal();
  CHECK(std::abs(ksg_mi(column_of(x), column_of(z), 5)) < 0.05);
}

TEST_CASE("conditional mi separates a chain from a fork") {
  // x -> y -> z: I(x; z | y) = 0 while I(x; z) > 0
  Rng rng(19);
  const int n = 1500;
  std::vector<double> x(n), y(n), z(n);
  for (int i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = x[i] + 0.5 * rng.normal();
    z[i] = y[i] + 0.5 * rng.normal();
  }
  const double chain = ksg_cmi(column_of(x), column_of(z), column_of(y), 5);
  CHECK(std::abs(chain) < 0.08);
  const double direct = ksg_mi(column_of(x), column_of(z), 5);
  CHECK(direct > 0.3);
  // empty conditioning block degrades to plain mi
  const RealMatrix none(static_cast<std::int64_t>(n), 0);
  CHECK(ksg_cmi(column_of(x), column_of(z), none, 5) == ksg_mi(column_of(x), column_of(z), 5));
}

TEST_CASE("ksg validates its inputs") {
  const RealMatrix a(10, 1), b(12, 1);
  CHECK_THROWS_AS(ksg_mi(a, b, 5), std::invalid_argument);
  const RealMatrix c(10, 1);
  CHECK_THROWS_AS(ksg_mi(a, c, 0), std::invalid_argument);
  CHECK_THROWS_AS(ksg_mi(a, c, 10), std::invalid_argument);  // k must be < n
}

TEST_CASE("median heuristic returns a positive bandwidth") {
  Rng rng(5);
  RealMatrix x(200, 2);
  for (auto& v : x.v) v = rng.normal();
  const double sigma = median_heuristic(x);
  CHECK(sigma > 0.5);
  CHECK(sigma < 5.0);
}

TEST_CASE("mmd separates distinct distributions and not identical ones") {
  Rng rng(7);
  const int n = 300;
  RealMatrix a(n, 1), b(n, 1), c(n, 1);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = rng.normal();
    b(i, 0) = rng.normal();
    c(i, 0) = rng.normal() + 1.5;
  }
  const double sigma = 1.0;
  // unbiased estimate between same-law samples hovers around zero
  CHECK(std::abs(mmd2_unbiased(a, b, sigma)) < 0.02);
  // an identical sample yields a slightly negative unbiased estimate
  CHECK(mmd2_unbiased(a, a, sigma) <= 0.0);
  // a mean shift is clearly visible
  CHECK(mmd2_unbiased(a, c, sigma) > 0.1);
}

TEST_CASE("mmd permutation test calibrates") {
  Rng rng(23);
  const int n = 150;
  RealMatrix a(n, 1), b(n, 1), c(n, 1);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = rng.normal();
    b(i, 0) = rng.normal();
    c(i, 0) = rng.normal() + 1.2;
  }
  const MmdTestResult same = mmd_permutation_test(a, b, 1.0, 100, 99);
  CHECK(same.p_value > 0.02);
  CHECK(same.p_value <= 1.0);
  const MmdTestResult diff = mmd_permutation_test(a, c, 1.0, 100, 99);
  CHECK(diff.p_value < 0.02);
  CHECK(diff.p_value >= 1.0 / 101.0);  // add-one estimator floor
  // deterministic given the seed
  const MmdTestResult again = mmd_permutation_test(a, c, 1.0, 100, 99);
  CHECK(again.p_value == diff.p_value);
  CHECK(again.mmd2 == diff.mmd2);
}

TEST_CASE("kmd score clamps and decays") {
  Rng rng(29);
  const int n = 250;
  RealMatrix a(n, 1), c(n, 1);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = rng.normal();
    c(i, 0) = rng.normal() + 2.0;
  }
  // identical blocks score exactly one through the clamp
  CHECK(kmd_score(a, a, 1.0, 1.0) == 1.0);
  // far-apart blocks score below
  const double far = kmd_score(a, c, 5.0, 0.0);
  CHECK(far < 0.9);
  CHECK(far > 0.0);
  // gamma sharpens the decay monotonically
  CHECK(kmd_score(a, c, 1.0, 1.0) >= kmd_score(a, c, 3.0, 1.0));
}

TEST_CASE("prior matching diagnostic") {
  Rng rng(31);
  std::vector<double> z(5000);
  for (auto& v : z) v = rng.normal();
  CHECK(prior_matching_diagnostic(z) == doctest::Approx(1.0).epsilon(0.05));
  std::vector<double> wide(5000);
  for (auto& v : wide) v = 3.0 * rng.normal();
  CHECK(prior_matching_diagnostic(wide) == doctest::Approx(9.0).epsilon(0.1));
  CHECK_THROWS_AS(prior_matching_diagnostic({}), std::invalid_argument);
}

TEST_CASE("cmi edge score formula") {
  CHECK(cmi_edge_score(0.5, 0.5) == 1.0);
  // negative estimates are clamped before scoring
  CHECK(cmi_edge_score(-0.2, -0.1) == 1.0);
  CHECK(cmi_edge_score(0.5, 0.0) == doctest::Approx(1.0 - 0.5 / (0.5 + 1e-6)).epsilon(1e-9));
  CHECK(cmi_edge_score(0.0, 5.0) == 0.0);  // clamped to the unit interval
}

namespace {

// A tiny w -> t -> y table pair for the graph-level scores.
void chain_tables(std::int64_t n, std::uint64_t seed, CausalGraph* g, Dataset* obs,
                  Dataset* gen) {
  Rng rng(seed);
  *obs = make_dataset({"w", "t", "y"},
                      {ColumnKind::kContinuous, ColumnKind::kCategorical,
                       ColumnKind::kContinuous},
                      n);
  obs->labels[1] = {"0", "1"};
  *gen = *obs;
  for (std::int64_t i = 0; i < n; ++i) {
    const double w = rng.normal();
    const double t = rng.bernoulli(1.0 / (1.0 + std::exp(-w)));
    const double y = 2.0 * std::sin(w) + 3.0 * t + rng.normal();
    obs->values(i, 0) = w;
    obs->values(i, 1) = t;
    obs->values(i, 2) = y;
    // generated table: same mechanism, fresh draws
    const double w2 = rng.normal();
    const double t2 = rng.bernoulli(1.0 / (1.0 + std::exp(-w2)));
    const double y2 = 2.0 * std::sin(w2) + 3.0 * t2 + rng.normal();
    gen->values(i, 0) = w2;
    gen->values(i, 1) = t2;
    gen->values(i, 2) = y2;
  }
  g->add_node("w");
  g->add_node("t", {"w"});
  g->add_node("y", {"t", "w"});
}

}  // namespace

TEST_CASE("graph-level cmi and kmd scores") {
  CausalGraph g;
  Dataset obs, gen;
  chain_tables(700, 101, &g, &obs, &gen);

  // identical tables score one on every edge
  const CmiScoreReport same = cmi_score(g, obs, obs, 5);
  CHECK(same.aggregate == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(same.edges.size() == 3);  // w->t, t->y, w->y
  for (const auto& e : same.edges) CHECK(e.score == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(same.per_node.count("t") == 1);
  CHECK(same.per_node.count("y") == 1);

  const KmdReport ksame = kmd_score_scm(g, obs, obs, 1.0, 1.0);
  CHECK(ksame.aggregate == 1.0);

  // a faithful regeneration keeps both scores high
  const CmiScoreReport faithful = cmi_score(g, obs, gen, 5);
  CHECK(faithful.aggregate > 0.5);
  const KmdReport kfaithful = kmd_score_scm(g, obs, gen, 1.0, 0.0);
  CHECK(kfaithful.aggregate > 0.85);

  // butchering the generated outcome drags them down
  Dataset broken = gen;
  Rng noise(55);
  for (std::int64_t i = 0; i < broken.num_rows(); ++i)
    broken.values(i, 2) = 10.0 * noise.normal();
  const KmdReport kbroken = kmd_score_scm(g, obs, broken, 1.0, 0.0);
  CHECK(kbroken.aggregate < kfaithful.aggregate);

  // a graph without a single edge has nothing to score
  CausalGraph lonely;
  lonely.add_node("w");
  CHECK_THROWS_AS(cmi_score(lonely, obs, obs, 5), std::invalid_argument);
}
