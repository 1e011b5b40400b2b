#include "causalrt/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "causalrt/rng.hpp"

namespace causalrt {
namespace {

constexpr double kPi = 3.14159265358979323846;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

std::vector<double> softmax3(double a, double b, double c) {
  const double m = std::max(a, std::max(b, c));
  const double ea = std::exp(a - m), eb = std::exp(b - m), ec = std::exp(c - m);
  const double z = ea + eb + ec;
  return {ea / z, eb / z, ec / z};
}

}  // namespace

GeneratedData gen_psm_failure(std::int64_t n, std::uint64_t seed) {
  GeneratedData out;
  out.treatment = "T";
  out.outcome = "Y";
  out.graph.add_node("W1");
  out.graph.add_node("W2");
  out.graph.add_node("C1", {"W1", "W2"});
  out.graph.add_node("T", {"W1", "W2", "C1"});
  out.graph.add_node("Y", {"T", "W1", "W2", "C1"});
  out.data = make_dataset({"W1", "W2", "C1", "T", "Y"},
                          {ColumnKind::kContinuous, ColumnKind::kContinuous,
                           ColumnKind::kCategorical, ColumnKind::kCategorical,
                           ColumnKind::kContinuous},
                          n);
  auto& uy_store = out.noise["Y"];
  uy_store.resize(static_cast<std::size_t>(n));
  out.true_ite.assign(static_cast<std::size_t>(n), 5000.0);
  out.true_ate = 5000.0;

  Rng rng(derive_seed(seed, "dgp.psm"));
  for (std::int64_t i = 0; i < n; ++i) {
    const double w1 = rng.normal();
    const double w2 = rng.normal();
    const int c1 = rng.categorical(softmax3(w1 - w2, std::cos(kPi * w1) + std::sin(kPi * w2),
                                            w1 * w1 - w2 * w2));
    const double ind_a = c1 == 0 ? 1.0 : 0.0;
    const double ind_b = c1 == 1 ? 1.0 : 0.0;
    const double ind_c = c1 == 2 ? 1.0 : 0.0;
    const double ut = rng.logistic();
    const double t = 2.0 * std::sin(kPi * w1) + 1.5 * w2 * w2 + 2.0 * w1 * w2 - 1.5 * ind_a +
                                 2.5 * ind_b + ut >
                             0.0
                         ? 1.0
                         : 0.0;
    const double uy = rng.normal(0.0, 6000.0);
    const double y = 5000.0 * t + 60.0 * (15.0 * w1 - 25.0 * w2 + 10.0 * w1 * w2) +
                     60.0 * (-40.0 * ind_a + 50.0 * ind_c) + uy;
    out.data.values(i, 0) = w1;
    out.data.values(i, 1) = w2;
    out.data.values(i, 2) = c1;
    out.data.values(i, 3) = t;
    out.data.values(i, 4) = y;
    uy_store[static_cast<std::size_t>(i)] = uy;
  }
  return out;
}

GeneratedData gen_stress_noninvertible(std::int64_t n, std::uint64_t seed) {
  GeneratedData out;
  out.treatment = "T";
  out.outcome = "Y";
  out.graph.add_node("W");
  out.graph.add_node("T", {"W"});
  out.graph.add_node("Y", {"W", "T"});
  out.data = make_dataset(
      {"W", "T", "Y"},
      {ColumnKind::kContinuous, ColumnKind::kCategorical, ColumnKind::kContinuous}, n);
  auto& uy_store = out.noise["Y"];
  uy_store.resize(static_cast<std::size_t>(n));
  out.true_ite.assign(static_cast<std::size_t>(n), 5.0);
  out.true_ate = 5.0;

  Rng rng(derive_seed(seed, "dgp.stress"));
  for (std::int64_t i = 0; i < n; ++i) {
    const double w = rng.uniform(-2.0, 2.0);
    const double ut = rng.logistic();
    const double t = w + 0.5 * w * w + ut > 0.0 ? 1.0 : 0.0;
    const double uy = rng.normal(0.0, 1.5);
    const double y = 5.0 * t + 2.0 * w + uy * uy;
    out.data.values(i, 0) = w;
    out.data.values(i, 1) = t;
    out.data.values(i, 2) = y;
    uy_store[static_cast<std::size_t>(i)] = uy;
  }
  return out;
}

namespace {

struct MediationDraw {
  double x1 = 0.0, x2 = 0.0;
  double z = 0.0;
  double t = 0.0;
  double um = 0.0, uy = 0.0;
};

MediationDraw mediation_roots(Rng& rng) {
  MediationDraw d;
  d.x1 = rng.normal();
  d.x2 = rng.uniform(-2.0, 2.0);
  d.z = rng.bernoulli(0.5);
  const double ut = rng.logistic(0.3);
  d.t = 2.0 * std::sin(kPi * d.x1) * d.x2 - 1.5 * d.z + ut > 0.0 ? 1.0 : 0.0;
  d.um = rng.normal(0.0, 1.5);
  if (d.z == 0.0) {
    const double mu = rng.bernoulli(0.5) ? 4.0 : -4.0;
    d.uy = rng.normal(mu, 2.0);
  } else {
    d.uy = rng.normal(0.0, 3.0);
  }
  return d;
}

double mediator_of(const MediationDraw& d, double t) {
  return 5.0 * std::tanh(d.x2) +
         (t == 1.0 ? 15.0 * std::cos(2.0 * kPi * d.x2) + 5.0 * d.x1 : -10.0 * std::abs(d.x1)) +
         d.um;
}

double outcome_of(const MediationDraw& d, double m) {
  return 25.0 * m + 10.0 * sinc(2.0 * d.x1) + d.uy;
}

}  // namespace

GeneratedData gen_ablation_mediation(std::int64_t n, std::uint64_t seed) {
  GeneratedData out;
  out.treatment = "T";
  out.outcome = "Y";
  out.graph.add_node("X1");
  out.graph.add_node("X2");
  out.graph.add_node("Z");
  out.graph.add_node("T", {"X1", "X2", "Z"});
  out.graph.add_node("M", {"X1", "X2", "T"});
  out.graph.add_node("Y", {"M", "X1", "Z"});
  out.data = make_dataset({"X1", "X2", "Z", "T", "M", "Y"},
                          {ColumnKind::kContinuous, ColumnKind::kContinuous,
                           ColumnKind::kCategorical, ColumnKind::kCategorical,
                           ColumnKind::kContinuous, ColumnKind::kContinuous},
                          n);
  auto& um_store = out.noise["M"];
  auto& uy_store = out.noise["Y"];
  um_store.resize(static_cast<std::size_t>(n));
  uy_store.resize(static_cast<std::size_t>(n));
  out.true_ite.resize(static_cast<std::size_t>(n));

  Rng rng(derive_seed(seed, "dgp.ablation"));
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const MediationDraw d = mediation_roots(rng);
    const double m = mediator_of(d, d.t);
    const double y = outcome_of(d, m);
    // Outcome noise is shared between arms, so it cancels in the difference.
    const double ite = outcome_of(d, mediator_of(d, 1.0)) - outcome_of(d, mediator_of(d, 0.0));
    out.data.values(i, 0) = d.x1;
    out.data.values(i, 1) = d.x2;
    out.data.values(i, 2) = d.z;
    out.data.values(i, 3) = d.t;
    out.data.values(i, 4) = m;
    out.data.values(i, 5) = y;
    um_store[static_cast<std::size_t>(i)] = d.um;
    uy_store[static_cast<std::size_t>(i)] = d.uy;
    out.true_ite[static_cast<std::size_t>(i)] = ite;
    acc += ite;
  }
  out.true_ate = acc / static_cast<double>(n);
  return out;
}

double ablation_analytic_ate() { return 250.0 * std::sqrt(2.0 / kPi); }

double ablation_mc_ate(std::int64_t n_mc, std::uint64_t seed) {
  if (n_mc < 1) throw std::invalid_argument("ablation_mc_ate: need n_mc >= 1");
  Rng rng(derive_seed(seed, "dgp.ablation_mc"));
  double acc = 0.0;
  for (std::int64_t i = 0; i < n_mc; ++i) {
    const MediationDraw d = mediation_roots(rng);
    acc += outcome_of(d, mediator_of(d, 1.0)) - outcome_of(d, mediator_of(d, 0.0));
  }
  return acc / static_cast<double>(n_mc);
}

GeneratedData gen_metric_validation_scm(std::int64_t n, std::uint64_t seed) {
  GeneratedData out;
  out.treatment = "T";
  out.outcome = "Y";
  out.graph.add_node("W");
  out.graph.add_node("T", {"W"});
  out.graph.add_node("Y", {"W", "T"});
  out.data = make_dataset(
      {"W", "T", "Y"},
      {ColumnKind::kContinuous, ColumnKind::kCategorical, ColumnKind::kContinuous}, n);
  auto& uy_store = out.noise["Y"];
  uy_store.resize(static_cast<std::size_t>(n));
  out.true_ite.assign(static_cast<std::size_t>(n), 3.0);
  out.true_ate = 3.0;

  Rng rng(derive_seed(seed, "dgp.golden"));
  for (std::int64_t i = 0; i < n; ++i) {
    const double w = rng.normal();
    const double ut = rng.logistic();
    const double t = w + ut > 0.0 ? 1.0 : 0.0;
    const double uy = rng.normal();
    out.data.values(i, 0) = w;
    out.data.values(i, 1) = t;
    out.data.values(i, 2) = 2.0 * std::sin(w) + 3.0 * t + uy;
    uy_store[static_cast<std::size_t>(i)] = uy;
  }
  return out;
}

namespace {

const std::vector<std::string> kLalondeColumns = {"treat", "age",    "educ", "black",
                                                  "hisp",  "nodegr", "re74", "re75"};

std::vector<ColumnKind> lalonde_kinds() {
  return {ColumnKind::kCategorical, ColumnKind::kContinuous, ColumnKind::kContinuous,
          ColumnKind::kCategorical, ColumnKind::kCategorical, ColumnKind::kCategorical,
          ColumnKind::kContinuous,  ColumnKind::kContinuous};
}

}  // namespace

Dataset gen_lalonde_like_covariates(std::int64_t n, std::uint64_t seed) {
  Dataset d = make_dataset(kLalondeColumns, lalonde_kinds(), n);
  Rng rng(derive_seed(seed, "dgp.lalonde_cov"));
  for (std::int64_t i = 0; i < n; ++i) {
    const double treat = rng.bernoulli(0.42);
    const double age = std::clamp(std::round(rng.normal(25.0, 7.0)), 17.0, 55.0);
    const double educ = std::clamp(std::round(rng.normal(10.3, 1.8)), 3.0, 16.0);
    const double black = rng.bernoulli(0.8);
    const double hisp = black == 1.0 ? 0.0 : static_cast<double>(rng.bernoulli(0.5));
    const double nodegr = educ < 12.0 ? (rng.bernoulli(0.95) ? 1.0 : 0.0)
                                      : (rng.bernoulli(0.1) ? 1.0 : 0.0);
    const double re74 = rng.bernoulli(0.73) ? 0.0
                                            : std::min(40000.0, std::exp(rng.normal(8.2, 0.9)));
    const double base75 = rng.bernoulli(0.65) ? 0.0
                                              : std::min(40000.0, std::exp(rng.normal(7.9, 1.0)));
    const double re75 = re74 > 0.0 && rng.bernoulli(0.6)
                            ? std::max(0.0, re74 * rng.uniform(0.5, 1.3))
                            : base75;
    d.values(i, 0) = treat;
    d.values(i, 1) = age;
    d.values(i, 2) = educ;
    d.values(i, 3) = black;
    d.values(i, 4) = hisp;
    d.values(i, 5) = nodegr;
    d.values(i, 6) = re74;
    d.values(i, 7) = re75;
  }
  return d;
}

Dataset load_lalonde_covariates(const std::string& path) {
  std::vector<CsvColumnSpec> spec;
  const std::vector<ColumnKind> kinds = lalonde_kinds();
  for (std::size_t i = 0; i < kLalondeColumns.size(); ++i)
    spec.push_back({kLalondeColumns[i], kinds[i]});
  return read_csv(path, spec);
}

GeneratedData gen_semisynthetic_lalonde(const Dataset& covariates, std::uint64_t seed) {
  for (const auto& name : kLalondeColumns)
    covariates.col_index_checked(name);
  const std::int64_t n = covariates.num_rows();
  if (n < 2) throw std::invalid_argument("gen_semisynthetic_lalonde: need at least two rows");

  GeneratedData out;
  out.treatment = "treat";
  out.outcome = "re78";
  for (const auto& name : kLalondeColumns) out.graph.add_node(name);
  out.graph.add_node("re78", kLalondeColumns);

  out.data = covariates;
  out.data.names.push_back("re78");
  out.data.kinds.push_back(ColumnKind::kContinuous);
  out.data.labels.emplace_back();
  RealMatrix wide(n, covariates.num_cols() + 1);
  for (std::int64_t r = 0; r < n; ++r)
    for (std::int64_t c = 0; c < covariates.num_cols(); ++c) wide(r, c) = covariates.values(r, c);
  out.data.values = std::move(wide);
  const std::int64_t yc = out.data.num_cols() - 1;

  const std::vector<double> treat = covariates.column("treat");
  const std::vector<double> age = covariates.column("age");
  const std::vector<double> educ = covariates.column("educ");
  const std::vector<double> black = covariates.column("black");
  const std::vector<double> hisp = covariates.column("hisp");
  const std::vector<double> nodegr = covariates.column("nodegr");
  const std::vector<double> re74 = covariates.column("re74");
  const std::vector<double> re75 = covariates.column("re75");
  double mu74 = 0.0;
  for (double v : re74) mu74 += v;
  mu74 /= static_cast<double>(n);

  auto& ub_store = out.noise["re78"];
  ub_store.resize(static_cast<std::size_t>(n));
  out.true_ite.resize(static_cast<std::size_t>(n));

  Rng rng(derive_seed(seed, "dgp.lalonde_outcome"));
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::size_t s = static_cast<std::size_t>(i);
    const double ub = rng.normal(0.0, 500.0);
    const double base = 2.0 * re74[s] + 1.5 * re75[s] + 100.0 * educ[s] - 50.0 * age[s] +
                        2000.0 * black[s] - 1000.0 * hisp[s] + ub;
    const double ite = 1500.0 + 350.0 * std::log(1.0 + educ[s]) -
                       3.0 * (age[s] - 40.0) * (age[s] - 40.0) +
                       1200.0 * (1.0 - nodegr[s]) * (1.0 - black[s]) -
                       1000.0 * std::tanh((re74[s] - mu74) / 1000.0);
    out.data.values(i, yc) = base + ite * treat[s];
    ub_store[s] = ub;
    out.true_ite[s] = ite;
    acc += ite;
  }
  out.true_ate = acc / static_cast<double>(n);
  return out;
}

}  // namespace causalrt
