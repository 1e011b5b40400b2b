#include "causal_roundtrip.h"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "causalrt/counterfactual.hpp"
#include "causalrt/dataset.hpp"
#include "causalrt/experiment.hpp"
#include "causalrt/scm.hpp"

struct crt_dataset {
  causalrt::Dataset d;
};

struct crt_scm {
  causalrt::FittedScm scm;
};

namespace {

using ordered_json = nlohmann::ordered_json;

thread_local std::string g_error;

template <typename F>
int guarded(F&& f) {
  try {
    f();
    g_error.clear();
    return CRT_OK;
  } catch (const std::invalid_argument& e) {
    g_error = e.what();
    return CRT_ERROR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    g_error = e.what();
    return CRT_ERROR_RUNTIME;
  }
}

void need(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::vector<causalrt::CsvColumnSpec> parse_schema(const std::string& schema) {
  std::vector<causalrt::CsvColumnSpec> spec;
  std::size_t pos = 0;
  while (pos <= schema.size()) {
    const std::size_t comma = schema.find(',', pos);
    const std::string item =
        schema.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    need(!item.empty(), "schema: empty entry");
    const std::size_t colon = item.find(':');
    need(colon != std::string::npos, "schema: entry '" + item + "' must be column:kind");
    causalrt::CsvColumnSpec cs;
    cs.name = item.substr(0, colon);
    const std::string kind = item.substr(colon + 1);
    if (kind == "continuous")
      cs.kind = causalrt::ColumnKind::kContinuous;
    else if (kind == "categorical")
      cs.kind = causalrt::ColumnKind::kCategorical;
    else
      need(false, "schema: unknown kind '" + kind + "'");
    spec.push_back(std::move(cs));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  need(!spec.empty(), "schema: no columns");
  return spec;
}

std::vector<std::uint64_t> parse_seeds_csv(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    need(!item.empty(), "seeds: empty entry");
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      need(false, "seeds: '" + item + "' is not a non-negative integer");
    }
    need(used == item.size(), "seeds: '" + item + "' is not a non-negative integer");
    seeds.push_back(static_cast<std::uint64_t>(v));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  need(!seeds.empty(), "seeds: empty list");
  return seeds;
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::runtime_error("out of memory");
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void run_config(causalrt::ExperimentConfig cfg, const char* out_dir, const char* seeds_csv) {
  if (seeds_csv && *seeds_csv) cfg.seeds = parse_seeds_csv(seeds_csv);
  if (out_dir && *out_dir) cfg.out_dir = out_dir;
  causalrt::validate_experiment_config(cfg);
  const causalrt::ExperimentOutput out = causalrt::run_experiment(cfg);
  causalrt::write_experiment_output(out, cfg.out_dir);
}

}  // namespace

extern "C" {

const char* crt_version(void) { return "1.0.0"; }

const char* crt_last_error(void) { return g_error.c_str(); }

void crt_free(char* p) { std::free(p); }

int crt_dataset_read_csv(const char* path, const char* schema, crt_dataset** out) {
  return guarded([&] {
    need(path && schema && out, "crt_dataset_read_csv: null argument");
    auto* h = new crt_dataset{causalrt::read_csv(path, parse_schema(schema))};
    *out = h;
  });
}

int crt_dataset_write_csv(const crt_dataset* d, const char* path) {
  return guarded([&] {
    need(d && path, "crt_dataset_write_csv: null argument");
    causalrt::write_csv(d->d, path);
  });
}

int crt_dataset_num_rows(const crt_dataset* d, int64_t* out) {
  return guarded([&] {
    need(d && out, "crt_dataset_num_rows: null argument");
    *out = d->d.num_rows();
  });
}

int crt_dataset_num_cols(const crt_dataset* d, int64_t* out) {
  return guarded([&] {
    need(d && out, "crt_dataset_num_cols: null argument");
    *out = d->d.num_cols();
  });
}

int crt_dataset_column(const crt_dataset* d, const char* name, double* buf, int64_t cap) {
  return guarded([&] {
    need(d && name && buf, "crt_dataset_column: null argument");
    const std::vector<double> col = d->d.column(name);
    need(cap >= static_cast<int64_t>(col.size()), "crt_dataset_column: buffer too small");
    std::memcpy(buf, col.data(), col.size() * sizeof(double));
  });
}

void crt_dataset_free(crt_dataset* d) { delete d; }

int crt_scm_fit(const crt_dataset* data, const char* model_json, uint64_t seed, crt_scm** out) {
  return guarded([&] {
    need(data && model_json && out, "crt_scm_fit: null argument");
    ordered_json j;
    try {
      j = ordered_json::parse(model_json);
    } catch (const std::exception& e) {
      need(false, std::string("model: JSON parse error: ") + e.what());
    }
    need(j.is_object(), "model: top level must be an object");
    for (const auto& item : j.items())
      need(item.key() == "nodes" || item.key() == "diffusion" || item.key() == "anm",
           "model: unknown field '" + item.key() + "'");
    need(j.contains("nodes") && j.at("nodes").is_array() && !j.at("nodes").empty(),
         "model: 'nodes' must be a non-empty array");

    // Reuse the experiment config parser for hyperparameter validation.
    ordered_json probe;
    probe["experiment"] = "roundtrip";
    if (j.contains("diffusion")) probe["diffusion"] = j.at("diffusion");
    if (j.contains("anm")) probe["anm"] = j.at("anm");
    const causalrt::ExperimentConfig base =
        causalrt::parse_experiment_config(probe.dump());

    causalrt::CausalGraph g;
    std::vector<std::string> mech_names;
    for (const auto& node : j.at("nodes")) {
      need(node.is_object(), "model: node entries must be objects");
      for (const auto& item : node.items())
        need(item.key() == "name" || item.key() == "parents" || item.key() == "mechanism",
             "model: unknown node field '" + item.key() + "'");
      need(node.contains("name") && node.at("name").is_string(),
           "model: node 'name' must be a string");
      std::vector<std::string> parents;
      if (node.contains("parents")) {
        need(node.at("parents").is_array(), "model: 'parents' must be an array");
        for (const auto& p : node.at("parents")) {
          need(p.is_string(), "model: parent names must be strings");
          parents.push_back(p.get<std::string>());
        }
      }
      g.add_node(node.at("name").get<std::string>(), std::move(parents));
      mech_names.push_back(node.contains("mechanism") ? node.at("mechanism").get<std::string>()
                                                      : std::string());
    }

    causalrt::ScmConfig sc;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const std::string& name = g.nodes[i];
      std::string mech = mech_names[i];
      if (mech.empty()) mech = g.is_root(name) ? "empirical" : "diffusion";
      causalrt::NodeModelConfig nm;
      if (mech == "empirical") {
        nm.kind = causalrt::MechanismKind::kEmpirical;
      } else if (mech == "anm") {
        nm.kind = causalrt::MechanismKind::kAnm;
        nm.anm = base.anm;
      } else if (mech == "diffusion") {
        nm.kind = causalrt::MechanismKind::kDiffusion;
        nm.diffusion = base.diffusion;
      } else {
        need(false, "model: unknown mechanism '" + mech + "' for node '" + name + "'");
      }
      sc.nodes[name] = nm;
    }

    auto* h = new crt_scm{causalrt::fit_scm(g, data->d, sc, seed)};
    *out = h;
  });
}

int crt_scm_sample(const crt_scm* s, int64_t n, uint64_t seed, crt_dataset** out) {
  return guarded([&] {
    need(s && out, "crt_scm_sample: null argument");
    auto* h = new crt_dataset{causalrt::sample_scm(s->scm, n, seed)};
    *out = h;
  });
}

int crt_counterfactual(const crt_scm* s, const crt_dataset* factual, const char* intervention_json,
                       crt_dataset** out) {
  return guarded([&] {
    need(s && factual && intervention_json && out, "crt_counterfactual: null argument");
    ordered_json j;
    try {
      j = ordered_json::parse(intervention_json);
    } catch (const std::exception& e) {
      need(false, std::string("intervention: JSON parse error: ") + e.what());
    }
    need(j.is_object(), "intervention: must be an object of node -> value");
    causalrt::Intervention iv;
    for (const auto& item : j.items()) {
      need(item.value().is_number(), "intervention: value for '" + item.key() + "' must be a number");
      iv[item.key()] = {item.value().get<double>()};
    }
    auto* h = new crt_dataset{causalrt::counterfactual_table(s->scm, factual->d, iv)};
    *out = h;
  });
}

int crt_estimate_ate(const crt_scm* s, const crt_dataset* data, const char* treatment,
                     const char* outcome, double* ate) {
  return guarded([&] {
    need(s && data && treatment && outcome && ate, "crt_estimate_ate: null argument");
    *ate = causalrt::estimate_ate(s->scm, data->d, treatment, outcome).ate;
  });
}

void crt_scm_free(crt_scm* s) { delete s; }

int crt_run_config_json(const char* config_json, const char* out_dir) {
  return guarded([&] {
    need(config_json, "crt_run_config_json: null config");
    run_config(causalrt::parse_experiment_config(config_json), out_dir, nullptr);
  });
}

int crt_run_config_file(const char* path, const char* out_dir, const char* seeds_csv) {
  return guarded([&] {
    need(path, "crt_run_config_file: null path");
    run_config(causalrt::load_experiment_config(path), out_dir, seeds_csv);
  });
}

int crt_preset_json(const char* name, char** out_json) {
  return guarded([&] {
    need(name && out_json, "crt_preset_json: null argument");
    *out_json = dup_string(causalrt::experiment_config_json(causalrt::preset_config(name)));
  });
}

}  // extern "C"
