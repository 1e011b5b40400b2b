#ifndef CAUSALRT_DATASET_HPP
#define CAUSALRT_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "causalrt/matrix.hpp"

namespace causalrt {

enum class ColumnKind { kContinuous, kCategorical };

// Tabular data with declared column kinds. Categorical cells hold label codes
// 0..K-1 as doubles; the per-column label table maps codes back to the
// original strings (empty for continuous columns and for categoricals that
// were constructed numerically).
struct Dataset {
  std::vector<std::string> names;
  std::vector<ColumnKind> kinds;
  std::vector<std::vector<std::string>> labels;
  RealMatrix values;

  std::int64_t num_rows() const { return values.rows; }
  std::int64_t num_cols() const { return values.cols; }

  // -1 when absent.
  std::int64_t col_index(const std::string& name) const;
  std::int64_t col_index_checked(const std::string& name) const;

  std::vector<double> column(const std::string& name) const;
  void check_consistent() const;
};

Dataset make_dataset(std::vector<std::string> names, std::vector<ColumnKind> kinds,
                     std::int64_t rows);

struct CsvColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
};

// Reads a UTF-8 CSV with a header row. Kinds are declared, never inferred;
// the spec list must cover the header exactly (order-insensitive). Categorical
// label codes are assigned by sorted unique cell text, so ingestion does not
// depend on row order.
Dataset read_csv(const std::string& path, const std::vector<CsvColumnSpec>& spec);

void write_csv(const Dataset& d, const std::string& path);

// Shortest text for a double that parses back exactly.
std::string format_double(double v);

}  // namespace causalrt

#endif  // CAUSALRT_DATASET_HPP
