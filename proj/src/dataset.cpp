#include "causalrt/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace causalrt {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

double parse_double(const std::string& cell, const std::string& col, std::size_t line_no) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw std::invalid_argument("read_csv: cannot parse '" + cell + "' as a number (column " +
                                col + ", line " + std::to_string(line_no) + ")");
  return v;
}

}  // namespace

std::int64_t Dataset::col_index(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<std::int64_t>(i);
  return -1;
}

std::int64_t Dataset::col_index_checked(const std::string& name) const {
  const std::int64_t i = col_index(name);
  if (i < 0) throw std::invalid_argument("Dataset: no column named '" + name + "'");
  return i;
}

std::vector<double> Dataset::column(const std::string& name) const {
  return values.column(col_index_checked(name));
}

void Dataset::check_consistent() const {
  const std::size_t c = names.size();
  if (kinds.size() != c || labels.size() != c || values.cols != static_cast<std::int64_t>(c))
    throw std::invalid_argument("Dataset: inconsistent column metadata");
  std::set<std::string> seen(names.begin(), names.end());
  if (seen.size() != c) throw std::invalid_argument("Dataset: duplicate column names");
}

Dataset make_dataset(std::vector<std::string> names, std::vector<ColumnKind> kinds,
                     std::int64_t rows) {
  Dataset d;
  d.names = std::move(names);
  d.kinds = std::move(kinds);
  d.labels.assign(d.names.size(), {});
  d.values = RealMatrix(rows, static_cast<std::int64_t>(d.names.size()));
  d.check_consistent();
  return d;
}

Dataset read_csv(const std::string& path, const std::vector<CsvColumnSpec>& spec) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("read_csv: empty file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Strip a UTF-8 BOM if present.
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
    line.erase(0, 3);

  const std::vector<std::string> header = split_csv_line(line);
  std::map<std::string, std::size_t> file_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (file_col.count(header[i]))
      throw std::invalid_argument("read_csv: duplicate header column '" + header[i] + "'");
    file_col[header[i]] = i;
  }
  std::set<std::string> declared;
  for (const auto& s : spec) {
    if (!declared.insert(s.name).second)
      throw std::invalid_argument("read_csv: column '" + s.name + "' declared twice");
    if (!file_col.count(s.name))
      throw std::invalid_argument("read_csv: declared column '" + s.name + "' missing from '" +
                                  path + "'");
  }
  for (const auto& h : header)
    if (!declared.count(h))
      throw std::invalid_argument("read_csv: file column '" + h + "' has no declared kind");

  std::vector<std::vector<std::string>> cells(spec.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::invalid_argument("read_csv: line " + std::to_string(line_no) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(header.size()));
    for (std::size_t c = 0; c < spec.size(); ++c)
      cells[c].push_back(fields[file_col.at(spec[c].name)]);
  }
  const std::int64_t rows = cells.empty() ? 0 : static_cast<std::int64_t>(cells[0].size());

  Dataset d;
  for (const auto& s : spec) {
    d.names.push_back(s.name);
    d.kinds.push_back(s.kind);
  }
  d.labels.assign(spec.size(), {});
  d.values = RealMatrix(rows, static_cast<std::int64_t>(spec.size()));

  for (std::size_t c = 0; c < spec.size(); ++c) {
    if (spec[c].kind == ColumnKind::kContinuous) {
      for (std::int64_t r = 0; r < rows; ++r)
        d.values(r, static_cast<std::int64_t>(c)) =
            parse_double(cells[c][static_cast<std::size_t>(r)], spec[c].name,
                         static_cast<std::size_t>(r) + 2);
    } else {
      std::set<std::string> uniq(cells[c].begin(), cells[c].end());
      std::vector<std::string> table(uniq.begin(), uniq.end());
      std::map<std::string, double> code;
      for (std::size_t k = 0; k < table.size(); ++k) code[table[k]] = static_cast<double>(k);
      for (std::int64_t r = 0; r < rows; ++r)
        d.values(r, static_cast<std::int64_t>(c)) = code.at(cells[c][static_cast<std::size_t>(r)]);
      d.labels[c] = std::move(table);
    }
  }
  d.check_consistent();
  return d;
}

void write_csv(const Dataset& d, const std::string& path) {
  d.check_consistent();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "' for writing");
  for (std::size_t c = 0; c < d.names.size(); ++c) {
    if (c) out << ',';
    out << csv_escape(d.names[c]);
  }
  out << '\n';
  for (std::int64_t r = 0; r < d.num_rows(); ++r) {
    for (std::size_t c = 0; c < d.names.size(); ++c) {
      if (c) out << ',';
      const double v = d.values(r, static_cast<std::int64_t>(c));
      if (d.kinds[c] == ColumnKind::kCategorical && !d.labels[c].empty()) {
        const auto k = static_cast<std::size_t>(std::llround(v));
        if (k >= d.labels[c].size())
          throw std::runtime_error("write_csv: label code out of range in column " + d.names[c]);
        out << csv_escape(d.labels[c][k]);
      } else {
        out << format_double(v);
      }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_csv: write failed for '" + path + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace causalrt
