#include <stdexcept>

#include "causalrt/experiment.hpp"

namespace causalrt {
namespace {

DiffusionConfig benchmark_diffusion(int epochs, int batch, int hidden, double lr, int timesteps,
                                    double lambda, double w) {
  DiffusionConfig d;
  d.epochs = epochs;
  d.batch_size = batch;
  d.hidden_dim = hidden;
  d.learning_rate = lr;
  d.timesteps = timesteps;
  d.lambda_task = lambda;
  d.guidance_weight = w;
  return d;
}

}  // namespace

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig cfg;
  cfg.out_dir = "out/" + name;

  // The five benchmark columns of the consolidated hyperparameter table:
  // epochs, batch, hidden, learning rate, timesteps, hybrid lambda, guidance w.
  if (name == "psm") {
    cfg.experiment = "psm";
    cfg.n = 5000;
    cfg.diffusion = benchmark_diffusion(1500, 128, 512, 1e-4, 200, 0.1, 0.0);
  } else if (name == "lalonde") {
    cfg.experiment = "semisynthetic";
    cfg.n = 1000;
    cfg.diffusion = benchmark_diffusion(1000, 64, 512, 1e-4, 200, 2.0, 1.0);
    cfg.kmd_sigma = 0.1;  // bandwidth the median heuristic lands on for re78
  } else if (name == "semisynthetic") {
    cfg.experiment = "semisynthetic";
    cfg.n = 1000;
    cfg.diffusion = benchmark_diffusion(1200, 64, 768, 1.1e-4, 50, 2.0, 0.1);
  } else if (name == "ablation") {
    cfg.experiment = "ablation";
    cfg.n = 2000;
    cfg.diffusion = benchmark_diffusion(700, 128, 768, 1e-4, 200, 5.0, 0.2);
  } else if (name == "stress") {
    cfg.experiment = "stress";
    cfg.n = 2000;
    cfg.diffusion = benchmark_diffusion(500, 128, 256, 1e-4, 200, 0.5, 0.0);
  } else if (name == "golden") {
    cfg.experiment = "golden";
    cfg.n = 1000;
    cfg.diffusion = benchmark_diffusion(1200, 64, 768, 1.1e-4, 50, 2.0, 0.1);
  } else if (name == "roundtrip") {
    cfg.experiment = "roundtrip";
    cfg.n = 1000;
  } else if (name == "cate" || name == "attribute" || name == "fairness") {
    cfg.experiment = name;
    cfg.n = 1000;
    cfg.diffusion = benchmark_diffusion(1000, 64, 512, 1e-4, 200, 2.0, 1.0);
  } else if (name == "validate-metrics") {
    cfg.experiment = "validate-metrics";
    cfg.metric_n = 1500;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }

  validate_experiment_config(cfg);
  return cfg;
}

}  // namespace causalrt
