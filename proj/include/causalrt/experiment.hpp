#ifndef CAUSALRT_EXPERIMENT_HPP
#define CAUSALRT_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "causalrt/scm.hpp"

namespace causalrt {

// Resolved run description. Every field has a working default, so a config
// file only needs "experiment"; hyperparameters are validated against the
// documented search ranges rather than silently accepted.
struct ExperimentConfig {
  std::string experiment;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::int64_t n = 2000;
  std::string out_dir = "out";
  // Ensemble protocol: one fixed dataset (first seed), per-seed model fits,
  // per-unit ITEs averaged across seeds before scoring. Off = independent
  // data + model per seed.
  bool ensemble = false;
  std::string data_csv;       // semisynthetic-family covariate table (optional)
  std::int64_t sample_n = 0;  // generated-table rows for KMD/CMI; 0 = n
  std::int64_t mc_samples = 200000;
  std::string group_column = "educ";
  std::string attribute = "black";
  double baseline = 0.0;
  std::int64_t metric_n = 1500;
  int ksg_k = 5;
  double kmd_gamma = 1.0;
  double kmd_sigma = 0.0;  // 0 = median heuristic
  DiffusionConfig diffusion;
  AnmConfig anm;
};

extern const std::vector<std::string> kExperimentIds;

// Strict parse: unknown keys and out-of-range values are invalid_argument
// with the offending field named.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
void validate_experiment_config(const ExperimentConfig& cfg);

// Canonical JSON echo of a resolved config; parsing it back round-trips.
std::string experiment_config_json(const ExperimentConfig& cfg);

// Named hyperparameter presets, one per benchmark configuration, plus
// defaults for the remaining experiment ids.
ExperimentConfig preset_config(const std::string& name);

// One scalar result. seed is the decimal run seed, or "all" for cross-seed
// and constant rows (truth references, ensemble scores).
struct MetricRow {
  std::string arm;
  std::string seed;
  std::string metric;
  double value = 0.0;
};

struct ExperimentOutput {
  ExperimentConfig config;
  std::vector<MetricRow> rows;
  std::vector<std::string> notes;
  double seconds = 0.0;
};

ExperimentOutput run_experiment(const ExperimentConfig& cfg);

// report.json (timing lives under its own top-level key so reruns can be
// compared byte-for-byte after dropping it), tables.csv, summary.md.
std::string render_report_json(const ExperimentOutput& out);
std::string render_tables_csv(const ExperimentOutput& out);
std::string render_summary_md(const ExperimentOutput& out);
void write_experiment_output(const ExperimentOutput& out, const std::string& dir);

}  // namespace causalrt

#endif  // CAUSALRT_EXPERIMENT_HPP
