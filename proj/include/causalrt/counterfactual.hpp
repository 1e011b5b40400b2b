#ifndef CAUSALRT_COUNTERFACTUAL_HPP
#define CAUSALRT_COUNTERFACTUAL_HPP

#include <map>
#include <string>
#include <vector>

#include "causalrt/scm.hpp"

namespace causalrt {

// do() assignments in raw value space. Each entry holds either one value
// (broadcast to every row) or one value per row.
using Intervention = std::map<std::string, std::vector<double>>;

// Abduction-action-prediction over a whole table at once. Only descendants of
// the intervened set are recomputed (in topological order, under the updated
// parent values); everything else is carried over unchanged, so a null
// intervention returns the input bit for bit.
Dataset counterfactual_table(const FittedScm& scm, const Dataset& factual,
                             const Intervention& intervention);

// Single-row convenience wrapper; returns the counterfactual row as a
// one-row dataset.
Dataset counterfactual_row(const FittedScm& scm, const Dataset& factual, std::int64_t row,
                           const Intervention& intervention);

struct AteReport {
  double ate = 0.0;
  std::vector<double> ite;  // per-unit effect estimates
  std::vector<double> y1;   // imputed potential outcomes, raw space
  std::vector<double> y0;
};

// Counterfactual imputation of the missing potential outcome: every unit gets
// do(treatment := 1 - t_observed), the factual outcome fills the observed arm.
// The treatment column must be binary categorical.
AteReport estimate_ate(const FittedScm& scm, const Dataset& data, const std::string& treatment,
                       const std::string& outcome);

double pehe(const std::vector<double>& ite_hat, const std::vector<double>& ite_true);

struct CateCell {
  double group_value = 0.0;
  std::int64_t count = 0;
  double cate = 0.0;
  bool low_support = false;  // fewer than 10 units in the group
};

// Mean estimated ITE per distinct value of the grouping column.
std::vector<CateCell> cate_by_group(const AteReport& report, const Dataset& data,
                                    const std::string& group_column);

struct AttributionResult {
  double factual_outcome = 0.0;
  double counterfactual_outcome = 0.0;
  double delta = 0.0;
  std::vector<std::string> swapped_nodes;
};

// Noise-swap attribution: the victim keeps its observed exogenous roots, but
// the non-root noises on the outcome's ancestral closure (or just the outcome
// itself with outcome_only) are replaced by the donor's abducted noises, and
// the affected mechanisms are re-decoded in topological order.
AttributionResult attribute_exogenous(const FittedScm& scm, const Dataset& data,
                                      std::int64_t victim_row, std::int64_t donor_row,
                                      const std::string& outcome, bool outcome_only = false);

struct FairnessCell {
  double level = 0.0;
  std::int64_t count = 0;
  double mean_delta = 0.0;  // mean(outcome_cf - outcome_factual)
};

// For every row whose attribute differs from the baseline level, impute the
// counterfactual outcome under do(attribute := baseline); deltas are grouped
// by the original attribute level.
std::vector<FairnessCell> fairness_audit(const FittedScm& scm, const Dataset& data,
                                         const std::string& attribute, const std::string& outcome,
                                         double baseline = 0.0);

// Per-unit mean of per-seed ITE estimates (the ensemble protocol: average
// first, then score).
std::vector<double> ensemble_ite(const std::vector<std::vector<double>>& per_seed_ite);

}  // namespace causalrt

#endif  // CAUSALRT_COUNTERFACTUAL_HPP
