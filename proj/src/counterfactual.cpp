#include "causalrt/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace causalrt {
namespace {

void validate_forced_value(const FittedScm& scm, const std::string& node, double v) {
  const ColumnStats& st = scm.stats.at(node);
  if (st.kind == ColumnKind::kCategorical) {
    if (std::abs(v - std::round(v)) > 1e-9 || v < 0.0 || v >= st.num_classes)
      throw std::invalid_argument("counterfactual: forced value for '" + node +
                                  "' is not a valid class code");
  }
  if (!std::isfinite(v))
    throw std::invalid_argument("counterfactual: forced value for '" + node + "' is not finite");
}

Dataset one_row(const Dataset& data, std::int64_t row) {
  if (row < 0 || row >= data.num_rows())
    throw std::invalid_argument("counterfactual: row index out of range");
  Dataset out = data;
  out.values = RealMatrix(1, data.num_cols());
  for (std::int64_t c = 0; c < data.num_cols(); ++c) out.values(0, c) = data.values(row, c);
  return out;
}

}  // namespace

Dataset counterfactual_table(const FittedScm& scm, const Dataset& factual,
                             const Intervention& intervention) {
  factual.check_consistent();
  const std::int64_t n = factual.num_rows();
  std::vector<std::string> targets;
  for (const auto& [node, vals] : intervention) {
    if (!scm.graph.has_node(node))
      throw std::invalid_argument("counterfactual: intervened node '" + node + "' not in graph");
    if (vals.size() != 1 && static_cast<std::int64_t>(vals.size()) != n)
      throw std::invalid_argument("counterfactual: forced column for '" + node +
                                  "' must have one value or one per row");
    for (double v : vals) validate_forced_value(scm, node, v);
    targets.push_back(node);
  }

  const std::set<std::string> recompute_set = descendants(scm.graph, targets);
  std::vector<std::string> recompute;
  for (const auto& node : scm.topo)
    if (recompute_set.count(node) && !intervention.count(node)) recompute.push_back(node);

  // Abduce only what will be re-decoded, conditioning on factual parents.
  NoiseProfile noise;
  if (!recompute.empty()) noise = encode_noise(scm, factual, recompute);

  Dataset cf = factual;
  for (const auto& [node, vals] : intervention) {
    const std::int64_t c = cf.col_index_checked(node);
    for (std::int64_t r = 0; r < n; ++r)
      cf.values(r, c) = vals.size() == 1 ? vals[0] : vals[static_cast<std::size_t>(r)];
  }
  for (const auto& node : recompute) {
    const std::vector<double> col = decode_node(scm, node, cf, noise, /*condition_changed=*/true);
    cf.values.set_column(cf.col_index_checked(node), col);
  }
  return cf;
}

Dataset counterfactual_row(const FittedScm& scm, const Dataset& factual, std::int64_t row,
                           const Intervention& intervention) {
  return counterfactual_table(scm, one_row(factual, row), intervention);
}

AteReport estimate_ate(const FittedScm& scm, const Dataset& data, const std::string& treatment,
                       const std::string& outcome) {
  const ColumnStats& ts = scm.stats.at(treatment);
  if (ts.kind != ColumnKind::kCategorical || ts.num_classes != 2)
    throw std::invalid_argument("estimate_ate: treatment '" + treatment +
                                "' must be binary categorical");
  if (!scm.graph.has_node(outcome))
    throw std::invalid_argument("estimate_ate: unknown outcome '" + outcome + "'");

  const std::vector<double> t = data.column(treatment);
  const std::vector<double> y = data.column(outcome);
  const std::int64_t n = data.num_rows();
  if (n == 0) throw std::invalid_argument("estimate_ate: empty dataset");

  std::vector<double> flipped(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) flipped[i] = 1.0 - t[i];
  const Dataset cf = counterfactual_table(scm, data, {{treatment, flipped}});
  const std::vector<double> y_cf = cf.column(outcome);

  AteReport rep;
  rep.ite.resize(static_cast<std::size_t>(n));
  rep.y1.resize(static_cast<std::size_t>(n));
  rep.y0.resize(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    const bool treated = t[i] == 1.0;
    rep.y1[i] = treated ? y[i] : y_cf[i];
    rep.y0[i] = treated ? y_cf[i] : y[i];
    rep.ite[i] = rep.y1[i] - rep.y0[i];
    acc += rep.ite[i];
  }
  rep.ate = acc / static_cast<double>(n);
  return rep;
}

double pehe(const std::vector<double>& ite_hat, const std::vector<double>& ite_true) {
  if (ite_hat.size() != ite_true.size() || ite_hat.empty())
    throw std::invalid_argument("pehe: size mismatch or empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < ite_hat.size(); ++i) {
    const double d = ite_hat[i] - ite_true[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(ite_hat.size()));
}

std::vector<CateCell> cate_by_group(const AteReport& report, const Dataset& data,
                                    const std::string& group_column) {
  const std::vector<double> g = data.column(group_column);
  if (g.size() != report.ite.size())
    throw std::invalid_argument("cate_by_group: report does not match dataset");
  std::map<double, CateCell> cells;
  for (std::size_t i = 0; i < g.size(); ++i) {
    CateCell& cell = cells[g[i]];
    cell.group_value = g[i];
    cell.count += 1;
    cell.cate += report.ite[i];
  }
  std::vector<CateCell> out;
  for (auto& [value, cell] : cells) {
    cell.cate /= static_cast<double>(cell.count);
    cell.low_support = cell.count < 10;
    out.push_back(cell);
  }
  return out;
}

AttributionResult attribute_exogenous(const FittedScm& scm, const Dataset& data,
                                      std::int64_t victim_row, std::int64_t donor_row,
                                      const std::string& outcome, bool outcome_only) {
  if (!scm.graph.has_node(outcome))
    throw std::invalid_argument("attribute_exogenous: unknown outcome '" + outcome + "'");
  if (scm.graph.is_root(outcome))
    throw std::invalid_argument("attribute_exogenous: outcome '" + outcome + "' is a root node");

  std::vector<std::string> swapped;
  if (outcome_only) {
    swapped.push_back(outcome);
  } else {
    const std::set<std::string> anc = ancestors(scm.graph, outcome);
    for (const auto& node : scm.topo) {
      const bool on_path = node == outcome || anc.count(node) > 0;
      if (on_path && !scm.graph.is_root(node)) swapped.push_back(node);
    }
  }

  const Dataset victim = one_row(data, victim_row);
  const Dataset donor = one_row(data, donor_row);
  const NoiseProfile donor_noise = encode_noise(scm, donor, swapped);

  Dataset cf = victim;
  for (const auto& node : swapped) {
    const std::vector<double> col =
        decode_node(scm, node, cf, donor_noise, /*condition_changed=*/true);
    cf.values.set_column(cf.col_index_checked(node), col);
  }

  AttributionResult res;
  res.factual_outcome = victim.column(outcome)[0];
  res.counterfactual_outcome = cf.column(outcome)[0];
  res.delta = res.counterfactual_outcome - res.factual_outcome;
  res.swapped_nodes = swapped;
  return res;
}

std::vector<FairnessCell> fairness_audit(const FittedScm& scm, const Dataset& data,
                                         const std::string& attribute, const std::string& outcome,
                                         double baseline) {
  validate_forced_value(scm, attribute, baseline);
  const std::vector<double> a = data.column(attribute);
  const std::vector<double> y = data.column(outcome);
  const Dataset cf = counterfactual_table(scm, data, {{attribute, {baseline}}});
  const std::vector<double> y_cf = cf.column(outcome);

  std::map<double, FairnessCell> cells;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == baseline) continue;
    FairnessCell& cell = cells[a[i]];
    cell.level = a[i];
    cell.count += 1;
    cell.mean_delta += y_cf[i] - y[i];
  }
  std::vector<FairnessCell> out;
  for (auto& [level, cell] : cells) {
    cell.mean_delta /= static_cast<double>(cell.count);
    out.push_back(cell);
  }
  return out;
}

std::vector<double> ensemble_ite(const std::vector<std::vector<double>>& per_seed_ite) {
  if (per_seed_ite.empty()) throw std::invalid_argument("ensemble_ite: no seeds");
  const std::size_t n = per_seed_ite.front().size();
  for (const auto& v : per_seed_ite)
    if (v.size() != n) throw std::invalid_argument("ensemble_ite: ragged seed results");
  std::vector<double> out(n, 0.0);
  for (const auto& v : per_seed_ite)
    for (std::size_t i = 0; i < n; ++i) out[i] += v[i];
  for (double& x : out) x /= static_cast<double>(per_seed_ite.size());
  return out;
}

}  // namespace causalrt
