#include "causalrt/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace causalrt {

ColumnStats fit_column_stats(const Dataset& d, const std::string& column) {
  const std::int64_t c = d.col_index_checked(column);
  const std::int64_t n = d.num_rows();
  ColumnStats s;
  s.kind = d.kinds[static_cast<std::size_t>(c)];
  if (s.kind == ColumnKind::kContinuous) {
    if (n < 2)
      throw std::invalid_argument("fit_column_stats: continuous column '" + column +
                                  "' needs at least two rows");
    double mean = 0.0;
    for (std::int64_t r = 0; r < n; ++r) mean += d.values(r, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::int64_t r = 0; r < n; ++r) {
      const double dvi = d.values(r, c) - mean;
      ss += dvi * dvi;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0)
      throw std::invalid_argument("fit_column_stats: continuous column '" + column +
                                  "' has zero variance");
    s.mean = mean;
    s.stddev = sd;
  } else {
    double max_code = -1.0;
    for (std::int64_t r = 0; r < n; ++r) {
      const double v = d.values(r, c);
      if (std::abs(v - std::round(v)) > 1e-9 || v < 0.0)
        throw std::invalid_argument("fit_column_stats: categorical column '" + column +
                                    "' holds a non-code value");
      max_code = std::max(max_code, v);
    }
    const int observed = static_cast<int>(std::llround(max_code)) + 1;
    const int table = static_cast<int>(d.labels[static_cast<std::size_t>(c)].size());
    s.num_classes = std::max(observed, table);
    if (s.num_classes < 2)
      throw std::invalid_argument("fit_column_stats: categorical column '" + column +
                                  "' has fewer than two classes");
  }
  return s;
}

double transform_target(const ColumnStats& s, double raw) {
  if (s.kind == ColumnKind::kContinuous) return (raw - s.mean) / s.stddev;
  return raw;
}

double inverse_target(const ColumnStats& s, double model) {
  if (s.kind == ColumnKind::kContinuous) return model * s.stddev + s.mean;
  const double rounded = std::round(model);
  return std::min(std::max(rounded, 0.0), static_cast<double>(s.num_classes - 1));
}

int ConditionLayout::width() const {
  int w = 0;
  for (const auto& s : parent_stats)
    w += (s.kind == ColumnKind::kContinuous) ? 1 : s.num_classes;
  return w;
}

ConditionLayout make_condition_layout(const CausalGraph& g, const std::string& node,
                                      const std::map<std::string, ColumnStats>& stats) {
  ConditionLayout layout;
  for (const auto& p : g.parents_of(node)) {
    const auto it = stats.find(p);
    if (it == stats.end())
      throw std::invalid_argument("make_condition_layout: no stats for parent '" + p + "'");
    layout.parent_names.push_back(p);
    layout.parent_stats.push_back(it->second);
  }
  return layout;
}

RealMatrix build_condition(const Dataset& table, const ConditionLayout& layout) {
  const std::int64_t n = table.num_rows();
  RealMatrix cond(n, layout.width());
  std::int64_t off = 0;
  for (std::size_t p = 0; p < layout.parent_names.size(); ++p) {
    const ColumnStats& s = layout.parent_stats[p];
    const std::int64_t c = table.col_index_checked(layout.parent_names[p]);
    if (s.kind == ColumnKind::kContinuous) {
      for (std::int64_t r = 0; r < n; ++r)
        cond(r, off) = (table.values(r, c) - s.mean) / s.stddev;
      off += 1;
    } else {
      for (std::int64_t r = 0; r < n; ++r) {
        const double v = table.values(r, c);
        const auto code = static_cast<std::int64_t>(std::llround(v));
        if (code < 0 || code >= s.num_classes)
          throw std::invalid_argument("build_condition: code outside [0, K-1] in column '" +
                                      layout.parent_names[p] + "'");
        cond(r, off + code) = 1.0;
      }
      off += s.num_classes;
    }
  }
  return cond;
}

}  // namespace causalrt
