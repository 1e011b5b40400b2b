#include "causalrt/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace causalrt {
namespace {

void validate_config(const DiffusionConfig& cfg) {
  if (cfg.timesteps < 4) throw std::invalid_argument("DiffusionConfig: timesteps must be >= 4");
  if (cfg.hidden_dim <= 0 || cfg.time_embed_dim <= 0 || cfg.time_embed_dim % 2 != 0)
    throw std::invalid_argument("DiffusionConfig: bad hidden/time_embed dims");
  if (cfg.num_blocks < 0) throw std::invalid_argument("DiffusionConfig: num_blocks < 0");
  if (cfg.learning_rate <= 0.0 || cfg.epochs <= 0 || cfg.batch_size <= 0)
    throw std::invalid_argument("DiffusionConfig: bad optimizer settings");
  if (cfg.condition_dropout < 0.0 || cfg.condition_dropout >= 1.0)
    throw std::invalid_argument("DiffusionConfig: condition_dropout outside [0,1)");
  if (cfg.lambda_task < 0.0) throw std::invalid_argument("DiffusionConfig: lambda_task < 0");
  if (cfg.target == TargetKind::kCategorical && cfg.num_classes < 2)
    throw std::invalid_argument("DiffusionConfig: categorical target needs num_classes >= 2");
  if (cfg.target == TargetKind::kCategorical && cfg.tau <= 0.0)
    throw std::invalid_argument("DiffusionConfig: tau must be positive");
}

// Softmax probabilities of the analytic logits; also returns dCE/dxhat0.
double ce_and_grad(double xhat0, int label, int num_classes, double tau, double* dxhat) {
  double max_logit = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < num_classes; ++k) {
    const double lk = -(xhat0 - k) * (xhat0 - k) / tau;
    max_logit = std::max(max_logit, lk);
  }
  double z = 0.0;
  for (int k = 0; k < num_classes; ++k)
    z += std::exp(-(xhat0 - k) * (xhat0 - k) / tau - max_logit);
  const double label_logit = -(xhat0 - label) * (xhat0 - label) / tau;
  const double ce = -(label_logit - max_logit - std::log(z));
  if (dxhat) {
    double acc = 0.0;
    for (int k = 0; k < num_classes; ++k) {
      const double lk = -(xhat0 - k) * (xhat0 - k) / tau;
      const double pk = std::exp(lk - max_logit) / z;
      const double ind = (k == label) ? 1.0 : 0.0;
      acc += (pk - ind) * (-2.0 * (xhat0 - k) / tau);
    }
    *dxhat = acc;
  }
  return ce;
}

}  // namespace

int denoiser_input_dim(int time_embed_dim, int condition_dim) {
  return 1 + time_embed_dim + condition_dim + 1;
}

double q_sample(const NoiseSchedule& s, int t, double x0, double eps) {
  if (t < 0 || t > s.timesteps) throw std::invalid_argument("q_sample: t outside grid");
  const std::size_t i = static_cast<std::size_t>(t);
  return s.gamma[i] * x0 + s.sigma[i] * eps;
}

double cfg_mix(double eps_cond, double eps_uncond, double w) {
  return (1.0 + w) * eps_cond - w * eps_uncond;
}

double xhat_zero(const NoiseSchedule& s, int t, double x_t, double eps_hat) {
  if (t < 0 || t > s.timesteps) throw std::invalid_argument("xhat_zero: t outside grid");
  const std::size_t i = static_cast<std::size_t>(t);
  return (x_t - s.sigma[i] * eps_hat) / s.gamma[i];
}

double categorical_cross_entropy(double xhat0, int label, int num_classes, double tau) {
  if (label < 0 || label >= num_classes)
    throw std::invalid_argument("categorical_cross_entropy: label outside [0, K-1]");
  return ce_and_grad(xhat0, label, num_classes, tau, nullptr);
}

double loss_simple(const std::vector<double>& eps_hat, const std::vector<double>& eps) {
  if (eps_hat.size() != eps.size() || eps.empty())
    throw std::invalid_argument("loss_simple: size mismatch or empty batch");
  double acc = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double d = eps_hat[i] - eps[i];
    acc += d * d;
  }
  return acc / static_cast<double>(eps.size());
}

double loss_hybrid(const std::vector<double>& eps_hat, const std::vector<double>& eps,
                   const std::vector<double>& xhat0, const std::vector<double>& target,
                   TargetKind kind, double lambda_task, int num_classes, double tau) {
  if (eps_hat.size() != eps.size() || xhat0.size() != eps.size() || target.size() != eps.size() ||
      eps.empty())
    throw std::invalid_argument("loss_hybrid: size mismatch or empty batch");
  double acc = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double d = eps_hat[i] - eps[i];
    double term = d * d;
    if (lambda_task != 0.0) {
      if (kind == TargetKind::kContinuous) {
        const double e0 = xhat0[i] - target[i];
        term += lambda_task * e0 * e0;
      } else {
        term += lambda_task * categorical_cross_entropy(
                    xhat0[i], static_cast<int>(std::lround(target[i])), num_classes, tau);
      }
    }
    acc += term;
  }
  return acc / static_cast<double>(eps.size());
}

void eps_predict(const TrainedDenoiser& d, const std::vector<double>& x, int t,
                 const RealMatrix& cond, bool null_condition, std::vector<double>* eps) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  if (cond.rows != n && d.condition_dim > 0)
    throw std::invalid_argument("eps_predict: condition row count mismatch");
  if (cond.cols != d.condition_dim)
    throw std::invalid_argument("eps_predict: condition width mismatch");
  const int ed = d.config.time_embed_dim;
  const std::vector<double> emb = sinusoidal_embed(static_cast<double>(t), ed);
  RealMatrix in(n, denoiser_input_dim(ed, d.condition_dim));
  for (std::int64_t r = 0; r < n; ++r) {
    double* row = in.row_ptr(r);
    row[0] = x[static_cast<std::size_t>(r)];
    std::copy(emb.begin(), emb.end(), row + 1);
    if (d.condition_dim > 0 && !null_condition)
      std::copy(cond.row_ptr(r), cond.row_ptr(r) + d.condition_dim, row + 1 + ed);
    row[1 + ed + d.condition_dim] = null_condition ? 1.0 : 0.0;
  }
  RealMatrix out;
  mlp_forward(d.params, in, &out);
  eps->resize(static_cast<std::size_t>(n));
  for (std::int64_t r = 0; r < n; ++r) (*eps)[static_cast<std::size_t>(r)] = out(r, 0);
}

EpsFn make_eps_fn(const TrainedDenoiser& d, RealMatrix cond) {
  const double w = d.config.guidance_weight;
  return [&d, cond = std::move(cond), w](const std::vector<double>& x, int t,
                                         std::vector<double>* eps) {
    eps_predict(d, x, t, cond, false, eps);
    if (w != 0.0) {
      std::vector<double> eps_null;
      eps_predict(d, x, t, cond, true, &eps_null);
      for (std::size_t i = 0; i < eps->size(); ++i)
        (*eps)[i] = cfg_mix((*eps)[i], eps_null[i], w);
    }
  };
}

TrainedDenoiser train_diffusion_mechanism(const DiffusionConfig& cfg,
                                          const std::vector<double>& target,
                                          const RealMatrix& cond, std::uint64_t seed) {
  validate_config(cfg);
  const std::int64_t n = static_cast<std::int64_t>(target.size());
  if (n == 0) throw std::invalid_argument("train_diffusion_mechanism: empty target");
  if (cond.rows != n && cond.cols > 0)
    throw std::invalid_argument("train_diffusion_mechanism: condition row count mismatch");
  if (cfg.target == TargetKind::kCategorical) {
    for (double v : target) {
      const double r = std::round(v);
      if (std::abs(v - r) > 1e-9 || r < 0 || r >= cfg.num_classes)
        throw std::invalid_argument("train_diffusion_mechanism: categorical target outside [0, K-1]");
    }
  }

  TrainedDenoiser d;
  d.config = cfg;
  d.schedule = linear_beta_schedule(cfg.timesteps);
  d.condition_dim = static_cast<int>(cond.cols);
  const int ed = cfg.time_embed_dim;
  MlpSpec spec;
  spec.input_dim = denoiser_input_dim(ed, d.condition_dim);
  spec.hidden_dim = cfg.hidden_dim;
  spec.output_dim = 1;
  spec.num_blocks = cfg.num_blocks;
  spec.activation = cfg.activation;

  Rng rng(seed);
  d.params = mlp_init(spec, rng);

  // Embeddings for every grid index, reused across the whole run.
  RealMatrix embeds(cfg.timesteps + 1, ed);
  for (int t = 0; t <= cfg.timesteps; ++t) {
    const std::vector<double> e = sinusoidal_embed(static_cast<double>(t), ed);
    std::copy(e.begin(), e.end(), embeds.row_ptr(t));
  }

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  AdamConfig aopt;
  aopt.learning_rate = cfg.learning_rate;
  AdamState astate;
  AlignedVector grad;
  MlpWorkspace ws;

  const std::int64_t bs = std::min<std::int64_t>(cfg.batch_size, n);
  RealMatrix in(bs, spec.input_dim);
  std::vector<int> bt(static_cast<std::size_t>(bs));
  std::vector<double> beps(static_cast<std::size_t>(bs)), bxt(static_cast<std::size_t>(bs)),
      btarget(static_cast<std::size_t>(bs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_acc = 0.0;
    std::int64_t batches = 0;
    for (std::int64_t start = 0; start + bs <= n; start += bs) {
      for (std::int64_t j = 0; j < bs; ++j) {
        const std::int64_t row = order[static_cast<std::size_t>(start + j)];
        const int t = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cfg.timesteps))) + 1;
        const double eps = rng.normal();
        const bool drop = d.condition_dim > 0 && rng.uniform() < cfg.condition_dropout;
        const double v = target[static_cast<std::size_t>(row)];
        const double xt = q_sample(d.schedule, t, v, eps);
        bt[static_cast<std::size_t>(j)] = t;
        beps[static_cast<std::size_t>(j)] = eps;
        bxt[static_cast<std::size_t>(j)] = xt;
        btarget[static_cast<std::size_t>(j)] = v;
        double* rp = in.row_ptr(j);
        rp[0] = xt;
        std::copy(embeds.row_ptr(t), embeds.row_ptr(t) + ed, rp + 1);
        if (d.condition_dim > 0) {
          if (drop)
            std::fill(rp + 1 + ed, rp + 1 + ed + d.condition_dim, 0.0);
          else
            std::copy(cond.row_ptr(row), cond.row_ptr(row) + d.condition_dim, rp + 1 + ed);
        }
        rp[1 + ed + d.condition_dim] = drop ? 1.0 : 0.0;
      }

      RealMatrix out;
      mlp_forward(d.params, in, &out, &ws);

      RealMatrix gout(bs, 1);
      double loss_acc = 0.0;
      const double inv_b = 1.0 / static_cast<double>(bs);
      for (std::int64_t j = 0; j < bs; ++j) {
        const std::size_t sj = static_cast<std::size_t>(j);
        const int t = bt[sj];
        const std::size_t ti = static_cast<std::size_t>(t);
        const double eps_hat = out(j, 0);
        const double diff = eps_hat - beps[sj];
        double loss = diff * diff;
        double g = 2.0 * diff;
        if (cfg.lambda_task != 0.0) {
          const double x0h = xhat_zero(d.schedule, t, bxt[sj], eps_hat);
          const double dx0_deps = -d.schedule.sigma[ti] / d.schedule.gamma[ti];
          if (cfg.target == TargetKind::kContinuous) {
            const double e0 = x0h - btarget[sj];
            loss += cfg.lambda_task * e0 * e0;
            g += cfg.lambda_task * 2.0 * e0 * dx0_deps;
          } else {
            double dce = 0.0;
            loss += cfg.lambda_task *
                    ce_and_grad(x0h, static_cast<int>(std::lround(btarget[sj])), cfg.num_classes,
                                cfg.tau, &dce);
            g += cfg.lambda_task * dce * dx0_deps;
          }
        }
        gout(j, 0) = g * inv_b;
        loss_acc += loss;
      }
      loss_acc *= inv_b;
      if (!std::isfinite(loss_acc))
        throw std::runtime_error("train_diffusion_mechanism: loss diverged at epoch " +
                                 std::to_string(epoch));

      mlp_backward(d.params, ws, gout, &grad);
      adam_update(d.params.theta, grad, astate, aopt);
      epoch_acc += loss_acc;
      ++batches;
    }
    d.epoch_loss.push_back(batches > 0 ? epoch_acc / static_cast<double>(batches) : 0.0);
  }
  return d;
}

}  // namespace causalrt
