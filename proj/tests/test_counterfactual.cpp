#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "causalrt/counterfactual.hpp"
#include "causalrt/rng.hpp"
#include "causalrt/scm.hpp"

using namespace causalrt;

namespace {

// Randomized binary treatment, linear outcome. Everything about this model
// has a closed form, which pins the whole abduction-action-prediction path.
Dataset linear_rct(std::int64_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d = make_dataset({"w", "t", "y"},
                           {ColumnKind::kContinuous, ColumnKind::kCategorical,
                            ColumnKind::kContinuous},
                           n);
  d.labels[1] = {"0", "1"};
  for (std::int64_t i = 0; i < n; ++i) {
    const double w = rng.normal();
    const double t = rng.bernoulli(0.5);
    const double y = 3.0 * t + 2.0 * w + 0.5 * rng.normal();
    d.values(i, 0) = w;
    d.values(i, 1) = t;
    d.values(i, 2) = y;
  }
  return d;
}

ScmConfig rct_config() {
  ScmConfig cfg;
  cfg.nodes["w"].kind = MechanismKind::kEmpirical;
  cfg.nodes["t"].kind = MechanismKind::kEmpirical;
  cfg.nodes["y"].kind = MechanismKind::kAnm;
  cfg.nodes["y"].anm.regressor = AnmRegressorKind::kLinear;
  return cfg;
}

CausalGraph rct_graph() {
  CausalGraph g;
  g.add_node("w");
  g.add_node("t");
  g.add_node("y", {"t", "w"});
  return g;
}

double sample_sd(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST_CASE("null intervention returns the table bit for bit") {
  const Dataset d = linear_rct(200, 3);
  const FittedScm scm = fit_scm(rct_graph(), d, rct_config(), 1);
  const Dataset cf = counterfactual_table(scm, d, {});
  CHECK(cf.values.v == d.values.v);  // exact, no tolerance
}

TEST_CASE("consistency: forcing the observed treatment reproduces the outcome") {
  const Dataset d = linear_rct(150, 5);
  const FittedScm scm = fit_scm(rct_graph(), d, rct_config(), 2);
  const Dataset cf = counterfactual_table(scm, d, {{"t", d.column("t")}});
  const std::vector<double> y = d.column("y");
  const std::vector<double> y_cf = cf.column("y");
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    worst = std::max(worst, std::abs(y_cf[i] - y[i]));
  CHECK(worst < 1e-9);
}

TEST_CASE("all-linear scm recovers the closed-form treatment coefficient") {
  const Dataset d = linear_rct(500, 7);
  const FittedScm scm = fit_scm(rct_graph(), d, rct_config(), 3);
  const AteReport rep = estimate_ate(scm, d, "t", "y");

  // independent least squares on a full-rank version of the engine's design:
  // treated dummy, standardized w, intercept. The fitted prediction gap at
  // t=1 vs t=0 is the dummy coefficient, and least-squares predictions are
  // unique, so this pins the engine's per-unit effect.
  const std::vector<double> w = d.column("w");
  const std::vector<double> t = d.column("t");
  const std::vector<double> y = d.column("y");
  const std::int64_t n = d.num_rows();
  double wm = 0.0, ym = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    wm += w[i];
    ym += y[i];
  }
  wm /= n;
  ym /= n;
  const double wsd = sample_sd(w);
  const double ysd = sample_sd(y);

  Eigen::MatrixXd X(n, 3);  // [onehot t1, z(w), 1]
  Eigen::VectorXd z(n);
  for (std::int64_t i = 0; i < n; ++i) {
    X(i, 0) = t[i] == 1.0 ? 1.0 : 0.0;
    X(i, 1) = (w[i] - wm) / wsd;
    X(i, 2) = 1.0;
    z(i) = (y[i] - ym) / ysd;
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(z);
  const double effect = ysd * beta(0);

  // the ite is the same constant for every unit
  double lo = rep.ite[0], hi = rep.ite[0];
  for (double v : rep.ite) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi - lo < 1e-9);
  CHECK(rep.ate == doctest::Approx(effect).epsilon(1e-6));
  CHECK(rep.ate == doctest::Approx(3.0).epsilon(0.1));  // near the truth too

  // ate is the mean of the ite by construction
  double mean_ite = 0.0;
  for (double v : rep.ite) mean_ite += v;
  mean_ite /= static_cast<double>(rep.ite.size());
  CHECK(rep.ate == doctest::Approx(mean_ite).epsilon(1e-12));
}

TEST_CASE("estimate_ate validates the treatment column") {
  const Dataset d = linear_rct(60, 9);
  const FittedScm scm = fit_scm(rct_graph(), d, rct_config(), 4);
  CHECK_THROWS_AS(estimate_ate(scm, d, "w", "y"), std::invalid_argument);  // continuous
  CHECK_THROWS_AS(estimate_ate(scm, d, "t", "zork"), std::invalid_argument);
}

TEST_CASE("intervention values are validated") {
  const Dataset d = linear_rct(40, 13);
  const FittedScm scm = fit_scm(rct_graph(), d, rct_config(), 5);
  CHECK_THROWS_AS(counterfactual_table(scm, d, {{"t", {2.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(counterfactual_table(scm, d, {{"t", {0.5}}}), std::invalid_argument);
  CHECK_THROWS_AS(counterfactual_table(scm, d, {{"ghost", {1.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(counterfactual_table(scm, d, {{"t", {1.0, 0.0}}}), std::invalid_argument);
  const double nan = std::nan("");
  CHECK_THROWS_AS(counterfactual_table(scm, d, {{"w", {nan}}}), std::invalid_argument);
}

TEST_CASE("pehe oracles") {
  CHECK(pehe({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
  CHECK(pehe({2.0, 3.0}, {1.0, 2.0}) == doctest::Approx(1.0).epsilon(1e-12));  // offset
  CHECK(pehe({1.0, 2.0}, {0.0, 0.0}) == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
  CHECK_THROWS_AS(pehe({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("cate grouping") {
  AteReport rep;
  rep.ite = {1.0, 3.0, 10.0, 20.0, 30.0};
  rep.ate = 12.8;
  Dataset d = make_dataset({"g"}, {ColumnKind::kContinuous}, 5);
  d.values.set_column(0, {0.0, 0.0, 1.0, 1.0, 1.0});
  const auto cells = cate_by_group(rep, d, "g");
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].group_value == 0.0);
  CHECK(cells[0].count == 2);
  CHECK(cells[0].cate == doctest::Approx(2.0));
  CHECK(cells[0].low_support);  // fewer than 10 units
  CHECK(cells[1].cate == doctest::Approx(20.0));

  // a single group containing everything reproduces the ate
  Dataset one = make_dataset({"g"}, {ColumnKind::kContinuous}, 5);
  one.values.set_column(0, {7.0, 7.0, 7.0, 7.0, 7.0});
  const auto whole = cate_by_group(rep, one, "g");
  REQUIRE(whole.size() == 1);
  CHECK(whole[0].cate == doctest::Approx((1.0 + 3.0 + 10.0 + 20.0 + 30.0) / 5.0).epsilon(1e-12));
}

TEST_CASE("noise-swap attribution along an anm chain") {
  // w -> m -> y, both mechanisms linear with noise
  Rng rng(21);
  Dataset d = make_dataset({"w", "m", "y"},
                           {ColumnKind::kContinuous, ColumnKind::kContinuous,
                            ColumnKind::kContinuous},
                           120);
  for (std::int64_t i = 0; i < 120; ++i) {
    const double w = rng.normal();
    const double m = 1.5 * w + 0.7 * rng.normal();
    const double y = 2.0 * m + 0.4 * rng.normal();
    d.values(i, 0) = w;
    d.values(i, 1) = m;
    d.values(i, 2) = y;
  }
  CausalGraph g;
  g.add_node("w");
  g.add_node("m", {"w"});
  g.add_node("y", {"m"});
  ScmConfig cfg;
  cfg.nodes["w"].kind = MechanismKind::kEmpirical;
  cfg.nodes["m"].kind = MechanismKind::kAnm;
  cfg.nodes["m"].anm.regressor = AnmRegressorKind::kLinear;
  cfg.nodes["y"].kind = MechanismKind::kAnm;
  cfg.nodes["y"].anm.regressor = AnmRegressorKind::kLinear;
  const FittedScm scm = fit_scm(g, d, cfg, 6);

  // donor == victim is a no-op
  const AttributionResult self = attribute_exogenous(scm, d, 4, 4, "y");
  CHECK(std::abs(self.delta) < 1e-9);

  // linear mechanisms make the swap antisymmetric
  const AttributionResult fwd = attribute_exogenous(scm, d, 0, 1, "y");
  const AttributionResult bwd = attribute_exogenous(scm, d, 1, 0, "y");
  CHECK(fwd.delta == doctest::Approx(-bwd.delta).epsilon(1e-9));
  CHECK(fwd.factual_outcome == doctest::Approx(d.values(0, 2)).epsilon(1e-12));

  // the full swap touches m and y; outcome-only touches y alone
  CHECK(fwd.swapped_nodes == std::vector<std::string>{"m", "y"});
  const AttributionResult only = attribute_exogenous(scm, d, 0, 1, "y", true);
  CHECK(only.swapped_nodes == std::vector<std::string>{"y"});

  // outcome-only delta is exactly the residual gap of an independent least
  // squares fit on the same standardized design
  const std::vector<double> m = d.column("m");
  const std::vector<double> y = d.column("y");
  const std::int64_t n = d.num_rows();
  double mm = 0.0, ym = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    mm += m[i];
    ym += y[i];
  }
  mm /= n;
  ym /= n;
  const double msd = sample_sd(m);
  const double ysd = sample_sd(y);
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd z(n);
  for (std::int64_t i = 0; i < n; ++i) {
    X(i, 0) = (m[i] - mm) / msd;
    X(i, 1) = 1.0;
    z(i) = (y[i] - ym) / ysd;
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(z);
  const Eigen::VectorXd resid = z - X * beta;
  const double expected = ysd * (resid(1) - resid(0));
  CHECK(only.delta == doctest::Approx(expected).epsilon(1e-6));

  CHECK_THROWS_AS(attribute_exogenous(scm, d, 0, 1, "w"), std::invalid_argument);  // root
  CHECK_THROWS_AS(attribute_exogenous(scm, d, -1, 1, "y"), std::invalid_argument);
}

TEST_CASE("fairness audit on an exact linear dgp") {
  // y = 3 a + w, noiseless, so the audit gap is the coefficient exactly
  Rng rng(31);
  Dataset d = make_dataset({"w", "a", "y"},
                           {ColumnKind::kContinuous, ColumnKind::kCategorical,
                            ColumnKind::kContinuous},
                           200);
  d.labels[1] = {"0", "1"};
  for (std::int64_t i = 0; i < 200; ++i) {
    const double w = rng.normal();
    const double a = rng.bernoulli(0.4);
    d.values(i, 0) = w;
    d.values(i, 1) = a;
    d.values(i, 2) = 3.0 * a + w;
  }
  CausalGraph g;
  g.add_node("w");
  g.add_node("a");
  g.add_node("y", {"a", "w"});
  ScmConfig cfg;
  cfg.nodes["w"].kind = MechanismKind::kEmpirical;
  cfg.nodes["a"].kind = MechanismKind::kEmpirical;
  cfg.nodes["y"].kind = MechanismKind::kAnm;
  cfg.nodes["y"].anm.regressor = AnmRegressorKind::kLinear;
  const FittedScm scm = fit_scm(g, d, cfg, 8);

  const auto cells = fairness_audit(scm, d, "a", "y", 0.0);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].level == 1.0);
  // gap is counterfactual minus factual: forcing a to 0 removes the +3
  CHECK(cells[0].mean_delta == doctest::Approx(-3.0).epsilon(1e-6));
  std::int64_t ones = 0;
  for (std::int64_t i = 0; i < 200; ++i) ones += d.values(i, 1) == 1.0 ? 1 : 0;
  CHECK(cells[0].count == ones);

  CHECK_THROWS_AS(fairness_audit(scm, d, "a", "y", 5.0), std::invalid_argument);
}

TEST_CASE("a null-path attribute audits to zero") {
  // y never reads a, so the audit must return an exactly null gap
  Rng rng(37);
  Dataset d = make_dataset({"w", "a", "y"},
                           {ColumnKind::kContinuous, ColumnKind::kCategorical,
                            ColumnKind::kContinuous},
                           150);
  d.labels[1] = {"0", "1"};
  for (std::int64_t i = 0; i < 150; ++i) {
    const double w = rng.normal();
    d.values(i, 0) = w;
    d.values(i, 1) = rng.bernoulli(0.5);
    d.values(i, 2) = 2.0 * w + 0.3 * rng.normal();
  }
  CausalGraph g;
  g.add_node("w");
  g.add_node("a");
  g.add_node("y", {"w"});
  ScmConfig cfg;
  cfg.nodes["w"].kind = MechanismKind::kEmpirical;
  cfg.nodes["a"].kind = MechanismKind::kEmpirical;
  cfg.nodes["y"].kind = MechanismKind::kAnm;
  cfg.nodes["y"].anm.regressor = AnmRegressorKind::kLinear;
  const FittedScm scm = fit_scm(g, d, cfg, 9);
  const auto cells = fairness_audit(scm, d, "a", "y", 0.0);
  REQUIRE(cells.size() == 1);
  // a has no descendants, so nothing is recomputed at all
  CHECK(cells[0].mean_delta == 0.0);
}

TEST_CASE("ensemble ite averages per unit") {
  const std::vector<std::vector<double>> runs = {{1.0, 2.0}, {3.0, 4.0}};
  const std::vector<double> avg = ensemble_ite(runs);
  REQUIRE(avg.size() == 2);
  CHECK(avg[0] == doctest::Approx(2.0));
  CHECK(avg[1] == doctest::Approx(3.0));
  CHECK_THROWS_AS(ensemble_ite({}), std::invalid_argument);
  CHECK_THROWS_AS(ensemble_ite({{1.0}, {1.0, 2.0}}), std::invalid_argument);
}
