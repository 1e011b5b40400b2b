#ifndef CAUSALRT_PREPROCESS_HPP
#define CAUSALRT_PREPROCESS_HPP

#include <map>
#include <string>
#include <vector>

#include "causalrt/dataset.hpp"
#include "causalrt/graph.hpp"
#include "causalrt/matrix.hpp"

namespace causalrt {

// Per-column statistics fitted on training data only. Continuous columns use
// the sample standard deviation (n-1); a zero-variance continuous column is a
// hard error rather than a silent degenerate scale.
struct ColumnStats {
  ColumnKind kind = ColumnKind::kContinuous;
  double mean = 0.0;
  double stddev = 1.0;
  int num_classes = 0;
};

ColumnStats fit_column_stats(const Dataset& d, const std::string& column);

// Target values enter mechanisms standardized (continuous) or as raw label
// codes (categorical). The inverse rounds and clips codes back to [0, K-1].
double transform_target(const ColumnStats& s, double raw);
double inverse_target(const ColumnStats& s, double model);

// Condition block layout for one node: parents in graph order, continuous
// parents standardized to one slot, categorical parents one-hot over K slots.
struct ConditionLayout {
  std::vector<std::string> parent_names;
  std::vector<ColumnStats> parent_stats;
  int width() const;
};

ConditionLayout make_condition_layout(const CausalGraph& g, const std::string& node,
                                      const std::map<std::string, ColumnStats>& stats);

RealMatrix build_condition(const Dataset& table, const ConditionLayout& layout);

}  // namespace causalrt

#endif  // CAUSALRT_PREPROCESS_HPP
