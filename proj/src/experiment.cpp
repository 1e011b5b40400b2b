#include "causalrt/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "causalrt/counterfactual.hpp"
#include "causalrt/dgp.hpp"
#include "causalrt/metric_validation.hpp"
#include "causalrt/metrics.hpp"
#include "causalrt/rng.hpp"

namespace causalrt {

using ordered_json = nlohmann::ordered_json;

const std::vector<std::string> kExperimentIds = {
    "roundtrip", "golden",    "stress",    "ablation", "psm",
    "semisynthetic", "cate", "attribute", "fairness", "validate-metrics"};

namespace {

[[noreturn]] void bad_field(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

void check_keys(const ordered_json& j, const std::string& where,
                const std::set<std::string>& allowed) {
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) bad_field(where + ": unknown field '" + item.key() + "'");
}

double num_field(const ordered_json& j, const std::string& name, double fallback) {
  if (!j.contains(name)) return fallback;
  if (!j.at(name).is_number()) bad_field("'" + name + "' must be a number");
  return j.at(name).get<double>();
}

std::int64_t int_field(const ordered_json& j, const std::string& name, std::int64_t fallback) {
  if (!j.contains(name)) return fallback;
  if (!j.at(name).is_number_integer()) bad_field("'" + name + "' must be an integer");
  return j.at(name).get<std::int64_t>();
}

std::string str_field(const ordered_json& j, const std::string& name, const std::string& fallback) {
  if (!j.contains(name)) return fallback;
  if (!j.at(name).is_string()) bad_field("'" + name + "' must be a string");
  return j.at(name).get<std::string>();
}

void in_range(double v, double lo, double hi, const std::string& name) {
  if (!(v >= lo && v <= hi))
    bad_field("'" + name + "' = " + format_double(v) + " outside [" + format_double(lo) + ", " +
              format_double(hi) + "]");
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
  }
  if (!j.is_object()) bad_field("top level must be an object");
  check_keys(j, "top level",
             {"experiment", "seeds", "seed", "n", "out_dir", "ensemble", "data_csv", "sample_n",
              "mc_samples", "group_column", "attribute", "baseline", "metric_n", "ksg_k",
              "kmd_gamma", "kmd_sigma", "diffusion", "anm"});

  ExperimentConfig cfg;
  if (!j.contains("experiment")) bad_field("missing required field 'experiment'");
  cfg.experiment = str_field(j, "experiment", "");

  if (j.contains("seeds") && j.contains("seed")) bad_field("give either 'seeds' or 'seed'");
  if (j.contains("seeds")) {
    if (!j.at("seeds").is_array() || j.at("seeds").empty())
      bad_field("'seeds' must be a non-empty array");
    cfg.seeds.clear();
    for (const auto& s : j.at("seeds")) {
      if (!s.is_number_integer() || s.get<std::int64_t>() < 0)
        bad_field("'seeds' entries must be non-negative integers");
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  } else if (j.contains("seed")) {
    const std::int64_t s = int_field(j, "seed", 1);
    if (s < 0) bad_field("'seed' must be non-negative");
    cfg.seeds = {static_cast<std::uint64_t>(s)};
  }

  cfg.n = int_field(j, "n", cfg.n);
  cfg.out_dir = str_field(j, "out_dir", cfg.out_dir);
  if (j.contains("ensemble")) {
    if (!j.at("ensemble").is_boolean()) bad_field("'ensemble' must be a boolean");
    cfg.ensemble = j.at("ensemble").get<bool>();
  }
  cfg.data_csv = str_field(j, "data_csv", cfg.data_csv);
  cfg.sample_n = int_field(j, "sample_n", cfg.sample_n);
  cfg.mc_samples = int_field(j, "mc_samples", cfg.mc_samples);
  cfg.group_column = str_field(j, "group_column", cfg.group_column);
  cfg.attribute = str_field(j, "attribute", cfg.attribute);
  cfg.baseline = num_field(j, "baseline", cfg.baseline);
  cfg.metric_n = int_field(j, "metric_n", cfg.metric_n);
  cfg.ksg_k = static_cast<int>(int_field(j, "ksg_k", cfg.ksg_k));
  cfg.kmd_gamma = num_field(j, "kmd_gamma", cfg.kmd_gamma);
  cfg.kmd_sigma = num_field(j, "kmd_sigma", cfg.kmd_sigma);

  if (j.contains("diffusion")) {
    const ordered_json& d = j.at("diffusion");
    if (!d.is_object()) bad_field("'diffusion' must be an object");
    check_keys(d, "diffusion",
               {"timesteps", "hidden_dim", "num_blocks", "time_embed_dim", "learning_rate",
                "epochs", "batch_size", "lambda_task", "guidance_weight", "condition_dropout",
                "tau", "sampler"});
    DiffusionConfig& dc = cfg.diffusion;
    dc.timesteps = static_cast<int>(int_field(d, "timesteps", dc.timesteps));
    dc.hidden_dim = static_cast<int>(int_field(d, "hidden_dim", dc.hidden_dim));
    dc.num_blocks = static_cast<int>(int_field(d, "num_blocks", dc.num_blocks));
    dc.time_embed_dim = static_cast<int>(int_field(d, "time_embed_dim", dc.time_embed_dim));
    dc.learning_rate = num_field(d, "learning_rate", dc.learning_rate);
    dc.epochs = static_cast<int>(int_field(d, "epochs", dc.epochs));
    dc.batch_size = static_cast<int>(int_field(d, "batch_size", dc.batch_size));
    dc.lambda_task = num_field(d, "lambda_task", dc.lambda_task);
    dc.guidance_weight = num_field(d, "guidance_weight", dc.guidance_weight);
    dc.condition_dropout = num_field(d, "condition_dropout", dc.condition_dropout);
    dc.tau = num_field(d, "tau", dc.tau);
    const std::string sampler = str_field(d, "sampler", "belm");
    if (sampler == "belm")
      dc.sampler = SamplerKind::kBelm;
    else if (sampler == "ddim")
      dc.sampler = SamplerKind::kDdim;
    else
      bad_field("'diffusion.sampler' must be \"belm\" or \"ddim\"");
  }

  if (j.contains("anm")) {
    const ordered_json& a = j.at("anm");
    if (!a.is_object()) bad_field("'anm' must be an object");
    check_keys(a, "anm",
               {"regressor", "hidden_dim", "num_blocks", "learning_rate", "epochs", "batch_size"});
    AnmConfig& ac = cfg.anm;
    const std::string reg = str_field(a, "regressor", "mlp");
    if (reg == "mlp")
      ac.regressor = AnmRegressorKind::kMlp;
    else if (reg == "linear")
      ac.regressor = AnmRegressorKind::kLinear;
    else
      bad_field("'anm.regressor' must be \"mlp\" or \"linear\"");
    ac.hidden_dim = static_cast<int>(int_field(a, "hidden_dim", ac.hidden_dim));
    ac.num_blocks = static_cast<int>(int_field(a, "num_blocks", ac.num_blocks));
    ac.learning_rate = num_field(a, "learning_rate", ac.learning_rate);
    ac.epochs = static_cast<int>(int_field(a, "epochs", ac.epochs));
    ac.batch_size = static_cast<int>(int_field(a, "batch_size", ac.batch_size));
  }

  validate_experiment_config(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

void validate_experiment_config(const ExperimentConfig& cfg) {
  if (std::find(kExperimentIds.begin(), kExperimentIds.end(), cfg.experiment) ==
      kExperimentIds.end())
    bad_field("unknown experiment id '" + cfg.experiment + "'");
  if (cfg.seeds.empty()) bad_field("'seeds' must be non-empty");
  if (cfg.seeds.size() > 64) bad_field("'seeds' has more than 64 entries");
  in_range(static_cast<double>(cfg.n), 50, 200000, "n");
  in_range(static_cast<double>(cfg.sample_n), 0, 200000, "sample_n");
  in_range(static_cast<double>(cfg.mc_samples), 1000, 100000000, "mc_samples");
  in_range(static_cast<double>(cfg.metric_n), 100, 20000, "metric_n");
  in_range(cfg.ksg_k, 1, 64, "ksg_k");
  in_range(cfg.kmd_gamma, 1e-6, 100, "kmd_gamma");
  in_range(cfg.kmd_sigma, 0, 1e6, "kmd_sigma");
  if (!std::isfinite(cfg.baseline)) bad_field("'baseline' must be finite");

  const DiffusionConfig& d = cfg.diffusion;
  in_range(d.timesteps, 50, 500, "diffusion.timesteps");
  in_range(d.hidden_dim, 8, 1024, "diffusion.hidden_dim");
  in_range(d.num_blocks, 1, 8, "diffusion.num_blocks");
  in_range(d.time_embed_dim, 2, 128, "diffusion.time_embed_dim");
  if (d.time_embed_dim % 2 != 0) bad_field("'diffusion.time_embed_dim' must be even");
  // Documented search ranges double as validation bounds.
  in_range(d.learning_rate, 5e-5, 2e-4, "diffusion.learning_rate");
  in_range(d.epochs, 1, 5000, "diffusion.epochs");
  in_range(d.batch_size, 1, 4096, "diffusion.batch_size");
  in_range(d.lambda_task, 0.0, 10.0, "diffusion.lambda_task");
  in_range(d.guidance_weight, 0.0, 10.0, "diffusion.guidance_weight");
  in_range(d.condition_dropout, 0.0, 0.9, "diffusion.condition_dropout");
  in_range(d.tau, 1e-6, 100.0, "diffusion.tau");

  const AnmConfig& a = cfg.anm;
  in_range(a.hidden_dim, 1, 1024, "anm.hidden_dim");
  in_range(a.num_blocks, 1, 8, "anm.num_blocks");
  in_range(a.learning_rate, 1e-5, 0.1, "anm.learning_rate");
  in_range(a.epochs, 1, 10000, "anm.epochs");
  in_range(a.batch_size, 1, 4096, "anm.batch_size");
}

std::string experiment_config_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["experiment"] = cfg.experiment;
  j["seeds"] = cfg.seeds;
  j["n"] = cfg.n;
  j["out_dir"] = cfg.out_dir;
  j["ensemble"] = cfg.ensemble;
  j["data_csv"] = cfg.data_csv;
  j["sample_n"] = cfg.sample_n;
  j["mc_samples"] = cfg.mc_samples;
  j["group_column"] = cfg.group_column;
  j["attribute"] = cfg.attribute;
  j["baseline"] = cfg.baseline;
  j["metric_n"] = cfg.metric_n;
  j["ksg_k"] = cfg.ksg_k;
  j["kmd_gamma"] = cfg.kmd_gamma;
  j["kmd_sigma"] = cfg.kmd_sigma;
  ordered_json d;
  d["timesteps"] = cfg.diffusion.timesteps;
  d["hidden_dim"] = cfg.diffusion.hidden_dim;
  d["num_blocks"] = cfg.diffusion.num_blocks;
  d["time_embed_dim"] = cfg.diffusion.time_embed_dim;
  d["learning_rate"] = cfg.diffusion.learning_rate;
  d["epochs"] = cfg.diffusion.epochs;
  d["batch_size"] = cfg.diffusion.batch_size;
  d["lambda_task"] = cfg.diffusion.lambda_task;
  d["guidance_weight"] = cfg.diffusion.guidance_weight;
  d["condition_dropout"] = cfg.diffusion.condition_dropout;
  d["tau"] = cfg.diffusion.tau;
  d["sampler"] = cfg.diffusion.sampler == SamplerKind::kBelm ? "belm" : "ddim";
  j["diffusion"] = d;
  ordered_json a;
  a["regressor"] = cfg.anm.regressor == AnmRegressorKind::kMlp ? "mlp" : "linear";
  a["hidden_dim"] = cfg.anm.hidden_dim;
  a["num_blocks"] = cfg.anm.num_blocks;
  a["learning_rate"] = cfg.anm.learning_rate;
  a["epochs"] = cfg.anm.epochs;
  a["batch_size"] = cfg.anm.batch_size;
  j["anm"] = a;
  return j.dump(2) + "\n";
}

namespace {

void add_row(std::vector<MetricRow>* rows, const std::string& arm, const std::string& seed,
             const std::string& metric, double value) {
  rows->push_back({arm, seed, metric, value});
}

std::string seed_str(std::uint64_t s) { return std::to_string(s); }

ScmConfig build_scm_config(const CausalGraph& g, const ExperimentConfig& cfg, SamplerKind sampler,
                           double lambda_override, const std::set<std::string>& anm_nodes) {
  ScmConfig sc;
  for (const auto& node : g.nodes) {
    NodeModelConfig nm;
    if (g.is_root(node)) {
      nm.kind = MechanismKind::kEmpirical;
    } else if (anm_nodes.count(node)) {
      nm.kind = MechanismKind::kAnm;
      nm.anm = cfg.anm;
    } else {
      nm.kind = MechanismKind::kDiffusion;
      nm.diffusion = cfg.diffusion;
      nm.diffusion.sampler = sampler;
      if (lambda_override >= 0.0) nm.diffusion.lambda_task = lambda_override;
    }
    sc.nodes[node] = nm;
  }
  return sc;
}

const std::vector<double>& abducted_scalar(const NoiseProfile& np, const std::string& node) {
  if (auto it = np.latent.find(node); it != np.latent.end()) return it->second.x_terminal;
  if (auto it = np.residual.find(node); it != np.residual.end()) return it->second;
  throw std::runtime_error("no abducted noise for node '" + node + "'");
}

GeneratedData make_semisynthetic(const ExperimentConfig& cfg, std::uint64_t data_seed) {
  const Dataset cov = cfg.data_csv.empty() ? gen_lalonde_like_covariates(cfg.n, data_seed)
                                           : load_lalonde_covariates(cfg.data_csv);
  return gen_semisynthetic_lalonde(cov, data_seed);
}

struct EffectEval {
  double ate = 0.0;
  double pehe_value = 0.0;
  std::vector<double> ite;
};

EffectEval effect_eval(const FittedScm& scm, const GeneratedData& gd) {
  AteReport rep = estimate_ate(scm, gd.data, gd.treatment, gd.outcome);
  EffectEval ev;
  ev.ate = rep.ate;
  ev.pehe_value = pehe(rep.ite, gd.true_ite);
  ev.ite = std::move(rep.ite);
  return ev;
}

double median_of(std::vector<double> v) {
  const std::size_t mid = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------- roundtrip

void run_roundtrip(const ExperimentConfig& cfg, std::vector<MetricRow>* rows,
                   std::vector<std::string>* notes) {
  notes->push_back("round-trip stubs: trained, random, adversarial, tanh, affine");
  const std::int64_t n = std::min<std::int64_t>(cfg.n, 1000);
  for (const std::uint64_t seed : cfg.seeds) {
    Rng rng(derive_seed(seed, "roundtrip"));
    std::vector<double> x0(static_cast<std::size_t>(n));
    for (double& v : x0) v = rng.normal(0.0, 1.5);

    struct Stub {
      std::string name;
      NoiseSchedule schedule;
      EpsFn fn;
    };
    // The eps closures below hold references to these two networks, so they
    // must outlive the stub list.
    TrainedDenoiser trained;
    TrainedDenoiser random_net;
    std::vector<Stub> stubs;
    {
      DiffusionConfig tc;
      tc.timesteps = 50;
      tc.hidden_dim = 32;
      tc.epochs = 40;
      tc.batch_size = 64;
      std::vector<double> target(512);
      for (double& v : target) v = rng.normal();
      trained =
          train_diffusion_mechanism(tc, target, RealMatrix(512, 0), derive_seed(seed, "rt.train"));
      stubs.push_back({"trained", trained.schedule, make_eps_fn(trained, RealMatrix(n, 0))});
    }
    {
      DiffusionConfig rc;
      rc.timesteps = cfg.diffusion.timesteps;
      rc.hidden_dim = 32;
      rc.time_embed_dim = 16;
      random_net.config = rc;
      random_net.schedule = linear_beta_schedule(rc.timesteps);
      random_net.condition_dim = 0;
      MlpSpec spec{denoiser_input_dim(rc.time_embed_dim, 0), rc.hidden_dim, 1, rc.num_blocks,
                   rc.activation};
      Rng prng(derive_seed(seed, "rt.random"));
      random_net.params = mlp_init(spec, prng);
      // Small perturbation so the zero-initialized head emits a nonzero eps.
      // Keep it gentle: a wild random net has a huge Lipschitz constant, and
      // float round-trip error compounds exponentially with it.
      for (double& w : random_net.params.theta) w += prng.normal(0.0, 0.05);
      stubs.push_back({"random", random_net.schedule, make_eps_fn(random_net, RealMatrix(n, 0))});
    }
    const NoiseSchedule sched = linear_beta_schedule(cfg.diffusion.timesteps);
    stubs.push_back({"adversarial", sched, [](const std::vector<double>& x, int, std::vector<double>* e) {
                       e->resize(x.size());
                       for (std::size_t i = 0; i < x.size(); ++i)
                         (*e)[i] = 1.2 * std::sin(3.0 * x[i]) + 0.4 * x[i];
                     }});
    stubs.push_back({"tanh", sched, [](const std::vector<double>& x, int, std::vector<double>* e) {
                       e->resize(x.size());
                       for (std::size_t i = 0; i < x.size(); ++i) (*e)[i] = std::tanh(x[i]);
                     }});
    stubs.push_back({"affine", sched, [](const std::vector<double>& x, int, std::vector<double>* e) {
                       e->resize(x.size());
                       for (std::size_t i = 0; i < x.size(); ++i) (*e)[i] = 0.7 * x[i] - 0.2;
                     }});

    double scale = 1.0;
    for (double v : x0) scale = std::max(scale, std::abs(v));
    for (const Stub& st : stubs) {
      std::vector<double> xt, aux, back;
      belm_encode(st.schedule, st.fn, x0, &xt, &aux);
      belm_decode(st.schedule, st.fn, xt, aux, &back);
      double err = 0.0;
      for (std::size_t i = 0; i < x0.size(); ++i) err = std::max(err, std::abs(back[i] - x0[i]));
      add_row(rows, "belm", seed_str(seed), "max_rel_err_" + st.name, err / scale);
    }

    const EpsFn tanh_fn = [](const std::vector<double>& x, int, std::vector<double>* e) {
      e->resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) (*e)[i] = std::tanh(x[i]);
    };
    std::vector<double> log_t, log_e;
    for (const int t_steps : {25, 50, 100, 200}) {
      const NoiseSchedule s = linear_beta_schedule(t_steps);
      std::vector<double> xt, back;
      ddim_encode(s, tanh_fn, x0, &xt);
      ddim_decode(s, tanh_fn, xt, &back);
      std::vector<double> rel(x0.size());
      for (std::size_t i = 0; i < x0.size(); ++i)
        rel[i] = std::abs(back[i] - x0[i]) / std::max(1.0, std::abs(x0[i]));
      const double med = median_of(rel);
      add_row(rows, "ddim", seed_str(seed), "sre_median_t" + std::to_string(t_steps), med);
      log_t.push_back(std::log(static_cast<double>(t_steps)));
      log_e.push_back(std::log(std::max(med, 1e-300)));
    }
    add_row(rows, "ddim", seed_str(seed), "loglog_slope", lsq_slope(log_t, log_e));
  }
}

// ------------------------------------------------- golden / semisynthetic

void golden_arm_metrics(const GeneratedData& gd, const std::string& arm, std::uint64_t seed,
                        const FittedScm& scm, std::vector<MetricRow>* rows,
                        std::vector<double>* ite_out) {
  const NoiseProfile np = encode_noise(scm, gd.data, {gd.outcome});
  const std::vector<double>& u_hat = abducted_scalar(np, gd.outcome);
  const double du = delta_u(u_hat, gd.noise.at(gd.outcome));
  const double sre_meas = measured_sre(scm, gd.outcome, gd.data);
  const double sre_rep = arm == "ddim" ? sre_meas : 0.0;
  const double cic = cic_score(du, sre_rep);
  const EffectEval ev = effect_eval(scm, gd);
  const std::string s = seed_str(seed);
  add_row(rows, arm, s, "ate", ev.ate);
  add_row(rows, arm, s, "ate_abs_err", std::abs(ev.ate - gd.true_ate));
  add_row(rows, arm, s, "pehe", ev.pehe_value);
  add_row(rows, arm, s, "delta_u", du);
  add_row(rows, arm, s, "delta_sre_measured", sre_meas);
  add_row(rows, arm, s, "delta_sre_reported", sre_rep);
  add_row(rows, arm, s, "cic", cic);
  if (ite_out) *ite_out = ev.ite;
}

void run_golden(const ExperimentConfig& cfg, std::vector<MetricRow>* rows,
                std::vector<std::string>* notes) {
  notes->push_back(
      "arms: belm, ddim, anm; a normalizing-flow arm is out of scope for this artifact");
  const std::vector<std::string> arms = {"belm", "ddim", "anm"};
  std::map<std::string, std::vector<std::vector<double>>> ensemble_ites;
  std::vector<double> ref_ite;
  for (const std::uint64_t seed : cfg.seeds) {
    const std::uint64_t dseed = cfg.ensemble ? cfg.seeds.front() : seed;
    const GeneratedData gd = make_semisynthetic(cfg, dseed);
    for (const std::string& arm : arms) {
      const SamplerKind sk = arm == "ddim" ? SamplerKind::kDdim : SamplerKind::kBelm;
      const std::set<std::string> anm_nodes =
          arm == "anm" ? std::set<std::string>{gd.outcome} : std::set<std::string>{};
      const ScmConfig sc = build_scm_config(gd.graph, cfg, sk, -1.0, anm_nodes);
      const FittedScm scm = fit_scm(gd.graph, gd.data, sc, seed);
      std::vector<double> ite;
      golden_arm_metrics(gd, arm, seed, scm, rows, &ite);
      if (cfg.ensemble) {
        ensemble_ites[arm].push_back(std::move(ite));
        ref_ite = gd.true_ite;
      }
    }
  }
  if (cfg.ensemble)
    for (const std::string& arm : arms)
      add_row(rows, arm, "all", "ensemble_pehe", pehe(ensemble_ite(ensemble_ites[arm]), ref_ite));
}

void run_semisynthetic(const ExperimentConfig& cfg, std::vector<MetricRow>* rows,
                       std::vector<std::string>* notes) {
  notes->push_back("single belm arm with distributional scores on a generated table");
  std::vector<std::vector<double>> ites;
  std::vector<double> ref_ite;
  for (const std::uint64_t seed : cfg.seeds) {
    const std::uint64_t dseed = cfg.ensemble ? cfg.seeds.front() : seed;
    const GeneratedData gd = make_semisynthetic(cfg, dseed);
    const ScmConfig sc = build_scm_config(gd.graph, cfg, cfg.diffusion.sampler, -1.0, {});
    const FittedScm scm = fit_scm(gd.graph, gd.data, sc, seed);
    std::vector<double> ite;
    golden_arm_metrics(gd, "belm", seed, scm, rows, &ite);

    const NoiseProfile np = encode_noise(scm, gd.data, {gd.outcome});
    add_row(rows, "belm", seed_str(seed), "prior_diag",
            prior_matching_diagnostic(abducted_scalar(np, gd.outcome)));
    const std::int64_t gen_n = cfg.sample_n > 0 ? cfg.sample_n : gd.data.num_rows();
    const Dataset gen = sample_scm(scm, gen_n, derive_seed(seed, "semisynthetic.sample"));
    add_row(rows, "belm", seed_str(seed), "kmd_aggregate",
            kmd_score_scm(gd.graph, gd.data, gen, cfg.kmd_gamma, cfg.kmd_sigma).aggregate);
    add_row(rows, "belm", seed_str(seed), "cmi_aggregate",
            cmi_score(gd.graph, gd.data, gen, cfg.ksg_k).aggregate);
    if (cfg.ensemble) {
      ites.push_back(std::move(ite));
      ref_ite = gd.true_ite;
    }
  }
  if (cfg.ensemble)
    add_row(rows, "belm", "all", "ensemble_pehe", pehe(ensemble_ite(ites), ref_ite));
}

// ------------------------------------------------------------------ stress

void run_stress(const ExperimentConfig& cfg, std::vector<MetricRow>* rows,
                std::vector<std::string>* notes) {
  notes->push_back("non-invertible outcome noise; arms belm vs ddim");
  for (const std::uint64_t seed : cfg.seeds) {
    const std::uint64_t dseed = cfg.ensemble ? cfg.seeds.front() : seed;
    const GeneratedData gd = gen_stress_noninvertible(cfg.n, dseed);
    for (const std::string& arm : {std::string("belm"), std::string("ddim")}) {
      const SamplerKind sk = arm == "ddim" ? SamplerKind::kDdim : SamplerKind::kBelm;
      const ScmConfig sc = build_scm_config(gd.graph, cfg, sk, -1.0, {});
      const FittedScm scm = fit_scm(gd.graph, gd.data, sc, seed);
      const EffectEval ev = effect_eval(scm, gd);
      const std::string s = seed_str(seed);
      add_row(rows, arm, s, "ate", ev.ate);
      add_row(rows, arm, s, "ate_abs_err", std::abs(ev.ate - gd.true_ate));
      add_row(rows, arm, s, "pehe", ev.pehe_value);
      add_row(rows, arm, s, "delta_sre_measured", measured_sre(scm, gd.outcome, gd.data));
    }
  }
}

// -------------------------------------------------------------------- psm

void run_psm(const ExperimentConfig& cfg, std::vector<MetricRow>* rows,
             std::vector<std::string>* notes) {
  notes->push_back("nonlinear confounding designed to break propensity methods; true ate 5000");
  for (const std::uint64_t seed : cfg.seeds) {
    const std::uint64_t dseed = cfg.ensemble ? cfg.seeds.front() : seed;
    const GeneratedData gd = gen_psm_failure(cfg.n, dseed);
    const ScmConfig sc = build_scm_config(gd.graph, cfg, cfg.diffusion.sampler, -1.0, {});
    const FittedScm scm = fit_scm(gd.graph, gd.data, sc, seed);
    const EffectEval ev = effect_eval(scm, gd);
    const std::string s = seed_str(seed);
    add_row(rows, "belm", s, "ate", ev.ate);
    add_row(rows, "belm", s, "ate_abs_err", std::abs(ev.ate - gd.true_ate));
    add_row(rows, "belm", s, "pehe", ev.pehe_value);
  }
}

// --------------------------------------------------------------- ablation

void run_ablation(const ExperimentConfig& cfg, std::vector<MetricRow>* rows,
                  std::vector<std::string>* notes) {
  notes->push_back("arms: full, no_inversion (ddim), no_hybrid (lambda 0), no_targeted (anm)");
  const double mc = ablation_mc_ate(cfg.mc_samples, 20240717ULL);
  add_row(rows, "truth", "all", "mc_ate", mc);
  add_row(rows, "truth", "all", "analytic_ate", ablation_analytic_ate());
  {
    // Documented identity: the hybrid loss at lambda = 0 is the simple loss,
    // same floating-point operations.
    Rng prng(7);
    std::vector<double> eh(32), e(32), xh(32), tg(32);
    for (std::size_t i = 0; i < 32; ++i) {
      eh[i] = prng.normal();
      e[i] = prng.normal();
      xh[i] = prng.normal();
      tg[i] = prng.normal();
    }
    const bool same = loss_hybrid(eh, e, xh, tg, TargetKind::kContinuous, 0.0, 0, 0.5) ==
                      loss_simple(eh, e);
    add_row(rows, "no_hybrid", "all", "lambda_zero_identity", same ? 1.0 : 0.0);
  }

  const std::vector<std::string> arms = {"full", "no_inversion", "no_hybrid", "no_targeted"};
  for (const std::uint64_t seed : cfg.seeds) {
    const std::uint64_t dseed = cfg.ensemble ? cfg.seeds.front() : seed;
    const GeneratedData gd = gen_ablation_mediation(cfg.n, dseed);
    for (const std::string& arm : arms) {
      const SamplerKind sk = arm == "no_inversion" ? SamplerKind::kDdim : SamplerKind::kBelm;
      const double lambda = arm == "no_hybrid" ? 0.0 : -1.0;
      const std::set<std::string> anm_nodes =
          arm == "no_targeted" ? std::set<std::string>{"M", "Y"} : std::set<std::string>{};
      const ScmConfig sc = build_scm_config(gd.graph, cfg, sk, lambda, anm_nodes);
      const FittedScm scm = fit_scm(gd.graph, gd.data, sc, seed);
      const EffectEval ev = effect_eval(scm, gd);
      const std::string s = seed_str(seed);
      add_row(rows, arm, s, "ate", ev.ate);
      add_row(rows, arm, s, "abs_err_vs_mc", std::abs(ev.ate - mc));
      add_row(rows, arm, s, "pehe", ev.pehe_value);
    }
  }
}

// ------------------------------------------------- cate, attribute, fairness

void run_cate(const ExperimentConfig& cfg, std::vector<MetricRow>* rows,
              std::vector<std::string>* notes) {
  notes->push_back("per-group effect against the planted heterogeneous truth");
  for (const std::uint64_t seed : cfg.seeds) {
    const std::uint64_t dseed = cfg.ensemble ? cfg.seeds.front() : seed;
    const GeneratedData gd = make_semisynthetic(cfg, dseed);
    const ScmConfig sc = build_scm_config(gd.graph, cfg, cfg.diffusion.sampler, -1.0, {});
    const FittedScm scm = fit_scm(gd.graph, gd.data, sc, seed);
    const AteReport rep = estimate_ate(scm, gd.data, gd.treatment, gd.outcome);
    const std::string s = seed_str(seed);
    add_row(rows, "belm", s, "ate", rep.ate);
    add_row(rows, "belm", s, "pehe", pehe(rep.ite, gd.true_ite));

    const std::vector<double> group = gd.data.column(cfg.group_column);
    std::map<double, std::pair<double, std::int64_t>> truth;
    for (std::size_t i = 0; i < group.size(); ++i) {
      truth[group[i]].first += gd.true_ite[i];
      truth[group[i]].second += 1;
    }
    double mae = 0.0;
    std::int64_t total = 0;
    for (const CateCell& cell : cate_by_group(rep, gd.data, cfg.group_column)) {
      const auto& [sum, count] = truth.at(cell.group_value);
      const double true_cate = sum / static_cast<double>(count);
      const std::string tag = format_double(cell.group_value);
      add_row(rows, "belm", s, "cate_hat_" + tag, cell.cate);
      add_row(rows, "belm", s, "cate_true_" + tag, true_cate);
      mae += std::abs(cell.cate - true_cate) * static_cast<double>(cell.count);
      total += cell.count;
    }
    add_row(rows, "belm", s, "cate_mae", mae / static_cast<double>(total));
  }
}

void run_attribute(const ExperimentConfig& cfg, std::vector<MetricRow>* rows,
                   std::vector<std::string>* notes) {
  notes->push_back("noise-swap attribution between fixed row pairs");
  for (const std::uint64_t seed : cfg.seeds) {
    const std::uint64_t dseed = cfg.ensemble ? cfg.seeds.front() : seed;
    const GeneratedData gd = make_semisynthetic(cfg, dseed);
    if (gd.data.num_rows() < 4)
      throw std::invalid_argument("attribute experiment needs at least 4 rows");
    const ScmConfig sc = build_scm_config(gd.graph, cfg, cfg.diffusion.sampler, -1.0, {});
    const FittedScm scm = fit_scm(gd.graph, gd.data, sc, seed);
    const std::string s = seed_str(seed);
    const AttributionResult r01 = attribute_exogenous(scm, gd.data, 0, 1, gd.outcome, false);
    const AttributionResult r23 = attribute_exogenous(scm, gd.data, 2, 3, gd.outcome, false);
    const AttributionResult o01 = attribute_exogenous(scm, gd.data, 0, 1, gd.outcome, true);
    add_row(rows, "belm", s, "factual_row0", r01.factual_outcome);
    add_row(rows, "belm", s, "counterfactual_pair01", r01.counterfactual_outcome);
    add_row(rows, "belm", s, "delta_pair01", r01.delta);
    add_row(rows, "belm", s, "delta_pair23", r23.delta);
    add_row(rows, "belm", s, "delta_outcome_only_pair01", o01.delta);
  }
}

void run_fairness(const ExperimentConfig& cfg, std::vector<MetricRow>* rows,
                  std::vector<std::string>* notes) {
  notes->push_back("counterfactual audit do(" + cfg.attribute +
                   " := " + format_double(cfg.baseline) + ")");
  for (const std::uint64_t seed : cfg.seeds) {
    const std::uint64_t dseed = cfg.ensemble ? cfg.seeds.front() : seed;
    const Dataset cov = cfg.data_csv.empty() ? gen_lalonde_like_covariates(cfg.n, dseed)
                                             : load_lalonde_covariates(cfg.data_csv);
    const GeneratedData gd = gen_semisynthetic_lalonde(cov, dseed);
    const ScmConfig sc = build_scm_config(gd.graph, cfg, cfg.diffusion.sampler, -1.0, {});
    const FittedScm scm = fit_scm(gd.graph, gd.data, sc, seed);
    const std::string s = seed_str(seed);

    // Ground truth by regenerating the outcome from the same noise draws with
    // the attribute forced to the baseline.
    Dataset cov_base = cov;
    const std::int64_t ac = cov_base.col_index_checked(cfg.attribute);
    for (std::int64_t r = 0; r < cov_base.num_rows(); ++r) cov_base.values(r, ac) = cfg.baseline;
    const GeneratedData gd_base = gen_semisynthetic_lalonde(cov_base, dseed);
    const std::vector<double> attr = cov.column(cfg.attribute);
    const std::vector<double> y_obs = gd.data.column(gd.outcome);
    const std::vector<double> y_base = gd_base.data.column(gd.outcome);

    double weighted = 0.0;
    std::int64_t affected = 0;
    for (const FairnessCell& cell :
         fairness_audit(scm, gd.data, cfg.attribute, gd.outcome, cfg.baseline)) {
      const std::string tag = format_double(cell.level);
      add_row(rows, "belm", s, "mean_delta_level_" + tag, cell.mean_delta);
      add_row(rows, "belm", s, "count_level_" + tag, static_cast<double>(cell.count));
      double true_sum = 0.0;
      std::int64_t true_count = 0;
      for (std::size_t i = 0; i < attr.size(); ++i) {
        if (attr[i] != cell.level) continue;
        true_sum += y_base[i] - y_obs[i];
        ++true_count;
      }
      add_row(rows, "belm", s, "true_mean_delta_level_" + tag,
              true_sum / static_cast<double>(true_count));
      weighted += cell.mean_delta * static_cast<double>(cell.count);
      affected += cell.count;
    }
    add_row(rows, "belm", s, "overall_mean_delta",
            affected > 0 ? weighted / static_cast<double>(affected) : 0.0);
  }
}

void run_validate_metrics(const ExperimentConfig& cfg, std::vector<MetricRow>* rows,
                          std::vector<std::string>* notes) {
  notes->push_back("five-model degradation gradient; see metric_validation.hpp");
  for (const std::uint64_t seed : cfg.seeds) {
    const MetricValidationReport rep = run_metric_validation(cfg.metric_n, seed);
    const std::string s = seed_str(seed);
    for (const MetricValidationModel& m : rep.models) {
      add_row(rows, m.name, s, "delta_u", m.delta_u);
      add_row(rows, m.name, s, "delta_sre_measured", m.delta_sre_measured);
      add_row(rows, m.name, s, "delta_sre_reported", m.delta_sre_reported);
      add_row(rows, m.name, s, "cic", m.cic);
      add_row(rows, m.name, s, "cmi", m.cmi);
      add_row(rows, m.name, s, "kmd", m.kmd);
    }
  }
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  validate_experiment_config(cfg);
  ExperimentOutput out;
  out.config = cfg;
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.experiment == "roundtrip")
    run_roundtrip(cfg, &out.rows, &out.notes);
  else if (cfg.experiment == "golden")
    run_golden(cfg, &out.rows, &out.notes);
  else if (cfg.experiment == "stress")
    run_stress(cfg, &out.rows, &out.notes);
  else if (cfg.experiment == "ablation")
    run_ablation(cfg, &out.rows, &out.notes);
  else if (cfg.experiment == "psm")
    run_psm(cfg, &out.rows, &out.notes);
  else if (cfg.experiment == "semisynthetic")
    run_semisynthetic(cfg, &out.rows, &out.notes);
  else if (cfg.experiment == "cate")
    run_cate(cfg, &out.rows, &out.notes);
  else if (cfg.experiment == "attribute")
    run_attribute(cfg, &out.rows, &out.notes);
  else if (cfg.experiment == "fairness")
    run_fairness(cfg, &out.rows, &out.notes);
  else if (cfg.experiment == "validate-metrics")
    run_validate_metrics(cfg, &out.rows, &out.notes);
  else
    bad_field("unknown experiment id '" + cfg.experiment + "'");
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

namespace {

struct Aggregate {
  std::int64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

std::map<std::pair<std::string, std::string>, Aggregate> aggregates_of(
    const std::vector<MetricRow>& rows) {
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const MetricRow& r : rows)
    if (r.seed != "all") groups[{r.arm, r.metric}].push_back(r.value);
  std::map<std::pair<std::string, std::string>, Aggregate> out;
  for (const auto& [key, vals] : groups) {
    Aggregate a;
    a.count = static_cast<std::int64_t>(vals.size());
    for (double v : vals) a.mean += v;
    a.mean /= static_cast<double>(vals.size());
    if (vals.size() > 1) {
      double ss = 0.0;
      for (double v : vals) ss += (v - a.mean) * (v - a.mean);
      a.stddev = std::sqrt(ss / static_cast<double>(vals.size() - 1));
    }
    out[key] = a;
  }
  return out;
}

}  // namespace

std::string render_report_json(const ExperimentOutput& out) {
  ordered_json j;
  j["version"] = "1.0.0";
  j["experiment"] = out.config.experiment;
  j["config"] = ordered_json::parse(experiment_config_json(out.config));
  j["notes"] = out.notes;
  ordered_json rows = ordered_json::array();
  for (const MetricRow& r : out.rows) {
    ordered_json o;
    o["arm"] = r.arm;
    o["seed"] = r.seed;
    o["metric"] = r.metric;
    o["value"] = r.value;
    rows.push_back(std::move(o));
  }
  j["rows"] = std::move(rows);
  ordered_json aggs = ordered_json::array();
  for (const auto& [key, a] : aggregates_of(out.rows)) {
    ordered_json o;
    o["arm"] = key.first;
    o["metric"] = key.second;
    o["count"] = a.count;
    o["mean"] = a.mean;
    o["std"] = a.stddev;
    aggs.push_back(std::move(o));
  }
  j["aggregates"] = std::move(aggs);
  j["timing"] = ordered_json{{"total_seconds", out.seconds}};
  return j.dump(2) + "\n";
}

std::string render_tables_csv(const ExperimentOutput& out) {
  std::string csv = "experiment,arm,seed,metric,value\n";
  for (const MetricRow& r : out.rows) {
    csv += out.config.experiment;
    csv += ',';
    csv += r.arm;
    csv += ',';
    csv += r.seed;
    csv += ',';
    csv += r.metric;
    csv += ',';
    csv += format_double(r.value);
    csv += '\n';
  }
  return csv;
}

std::string render_summary_md(const ExperimentOutput& out) {
  std::ostringstream md;
  const ExperimentConfig& c = out.config;
  md << "# Experiment: " << c.experiment << "\n\n";
  md << "- n = " << c.n << ", seeds =";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) md << (i ? ", " : " ") << c.seeds[i];
  md << (c.ensemble ? " (ensemble protocol)" : "") << "\n";
  md << "- diffusion: T = " << c.diffusion.timesteps << ", hidden = " << c.diffusion.hidden_dim
     << ", epochs = " << c.diffusion.epochs << ", lambda = " << format_double(c.diffusion.lambda_task)
     << ", w = " << format_double(c.diffusion.guidance_weight) << ", sampler = "
     << (c.diffusion.sampler == SamplerKind::kBelm ? "belm" : "ddim") << "\n\n";

  md << "## Aggregates (over seeds)\n\n";
  md << "| Arm | Metric | Mean | Std | N |\n|---|---|---|---|---|\n";
  for (const auto& [key, a] : aggregates_of(out.rows))
    md << "| " << key.first << " | " << key.second << " | " << format_double(a.mean) << " | "
       << format_double(a.stddev) << " | " << a.count << " |\n";

  bool any_all = false;
  for (const MetricRow& r : out.rows)
    if (r.seed == "all") any_all = true;
  if (any_all) {
    md << "\n## Cross-seed rows\n\n| Arm | Metric | Value |\n|---|---|---|\n";
    for (const MetricRow& r : out.rows)
      if (r.seed == "all")
        md << "| " << r.arm << " | " << r.metric << " | " << format_double(r.value) << " |\n";
  }

  if (!out.notes.empty()) {
    md << "\n## Notes\n\n";
    for (const std::string& n : out.notes) md << "- " << n << "\n";
  }
  return md.str();
}

void write_experiment_output(const ExperimentOutput& out, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto write = [&](const std::string& name, const std::string& content) {
    const std::string path = dir + "/" + name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << content;
  };
  write("report.json", render_report_json(out));
  write("tables.csv", render_tables_csv(out));
  write("summary.md", render_summary_md(out));
}

}  // namespace causalrt
