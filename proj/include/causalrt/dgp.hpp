#ifndef CAUSALRT_DGP_HPP
#define CAUSALRT_DGP_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "causalrt/dataset.hpp"
#include "causalrt/graph.hpp"

namespace causalrt {

// One synthetic draw together with everything an evaluation needs and a model
// never sees: the true exogenous noise of continuous mechanism nodes, the
// per-row treatment effect, and its population mean.
struct GeneratedData {
  Dataset data;
  CausalGraph graph;
  std::map<std::string, std::vector<double>> noise;
  std::vector<double> true_ite;
  double true_ate = 0.0;
  std::string treatment;
  std::string outcome;
};

// Propensity-overlap stressor: two Gaussian confounders, a three-level
// derived covariate, a sharply nonlinear treatment assignment and an outcome
// whose confounded terms dwarf the constant effect of 5000.
GeneratedData gen_psm_failure(std::int64_t n, std::uint64_t seed);

// Outcome noise enters squared, so the structural map is non-invertible in
// the noise and pointwise abduction cannot be exact. Constant effect 5.
GeneratedData gen_stress_noninvertible(std::int64_t n, std::uint64_t seed);

// Mediation chain T -> M -> Y with discontinuous mediator response and
// Z-dependent bimodal outcome noise.
GeneratedData gen_ablation_mediation(std::int64_t n, std::uint64_t seed);

// The exact population ATE of the mediation design, 250 sqrt(2/pi).
double ablation_analytic_ate();

// Shared-noise Monte Carlo estimate of the mediation ATE; converges to
// ablation_analytic_ate().
double ablation_mc_ate(std::int64_t n_mc, std::uint64_t seed);

// Three-node chain W -> T -> Y with known additive outcome noise; used by the
// golden comparison, where recovered noise can be scored against the truth.
GeneratedData gen_metric_validation_scm(std::int64_t n, std::uint64_t seed);

// Synthetic covariate table with the job-training study schema
// (treat, age, educ, black, hisp, nodegr, re74, re75).
Dataset gen_lalonde_like_covariates(std::int64_t n, std::uint64_t seed);

// Reads a covariate CSV and validates it against that schema.
Dataset load_lalonde_covariates(const std::string& path);

// Plants a known heterogeneous effect on top of real or synthetic covariates:
// re78 = base earnings + ITE * treat, with ITE depending on educ, age,
// nodegr/black and re74. Covariate rows stay untouched and become empirical
// root nodes of the returned graph.
GeneratedData gen_semisynthetic_lalonde(const Dataset& covariates, std::uint64_t seed);

}  // namespace causalrt

#endif  // CAUSALRT_DGP_HPP
