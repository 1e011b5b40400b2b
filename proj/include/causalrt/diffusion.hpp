#ifndef CAUSALRT_DIFFUSION_HPP
#define CAUSALRT_DIFFUSION_HPP

#include <cstdint>
#include <vector>

#include "causalrt/matrix.hpp"
#include "causalrt/nn.hpp"
#include "causalrt/samplers.hpp"
#include "causalrt/schedule.hpp"

namespace causalrt {

enum class TargetKind { kContinuous, kCategorical };

struct DiffusionConfig {
  int timesteps = 200;
  int hidden_dim = 256;
  int num_blocks = 2;
  int time_embed_dim = 32;
  Activation activation = Activation::kSilu;
  double learning_rate = 1e-4;
  int epochs = 500;
  int batch_size = 128;
  double lambda_task = 0.0;      // weight on the x0-space task loss
  double guidance_weight = 0.0;  // classifier-free guidance w
  double condition_dropout = 0.1;
  double tau = 0.5;  // temperature of the categorical logits
  SamplerKind sampler = SamplerKind::kBelm;
  TargetKind target = TargetKind::kContinuous;
  int num_classes = 0;  // categorical targets only
};

// A trained scalar noise predictor for one mechanism. The network sees rows
// [v_t | time embedding | condition | null flag] and outputs eps_hat.
struct TrainedDenoiser {
  DiffusionConfig config;
  NoiseSchedule schedule;
  int condition_dim = 0;
  MlpParams params;
  std::vector<double> epoch_loss;
};

int denoiser_input_dim(int time_embed_dim, int condition_dim);

double q_sample(const NoiseSchedule& s, int t, double x0, double eps);

// (1+w) conditional - w unconditional. w = 0 returns the conditional branch.
double cfg_mix(double eps_cond, double eps_uncond, double w);

// One-step clean-value estimate (x_t - sigma_t eps_hat) / gamma_t.
double xhat_zero(const NoiseSchedule& s, int t, double x_t, double eps_hat);

// Cross-entropy of the analytic class logits logit_k = -(xhat0 - k)^2 / tau
// against an integer label.
double categorical_cross_entropy(double xhat0, int label, int num_classes, double tau);

double loss_simple(const std::vector<double>& eps_hat, const std::vector<double>& eps);

// Mean of (eps_hat - eps)^2 + lambda * task, where task is squared x0 error
// for continuous targets and the cross-entropy above for categorical ones
// (target then holds the label codes). lambda = 0 reproduces loss_simple
// exactly, same floating-point operations.
double loss_hybrid(const std::vector<double>& eps_hat, const std::vector<double>& eps,
                   const std::vector<double>& xhat0, const std::vector<double>& target,
                   TargetKind kind, double lambda_task, int num_classes, double tau);

// Batched prediction at shared grid index t. null_condition zeroes the
// condition slot and raises the flag (the branch guidance mixes against).
void eps_predict(const TrainedDenoiser& d, const std::vector<double>& x, int t,
                 const RealMatrix& cond, bool null_condition, std::vector<double>* eps);

// Sampler callback with the denoiser's guidance weight baked in. Guidance is
// applied identically during encoding and decoding; an asymmetric mix would
// break exact inversion.
EpsFn make_eps_fn(const TrainedDenoiser& d, RealMatrix cond);

// Minibatch Adam training of the denoiser on a transformed target column and
// its condition matrix. Fully deterministic given the seed. Throws if the
// loss goes non-finite.
TrainedDenoiser train_diffusion_mechanism(const DiffusionConfig& cfg,
                                          const std::vector<double>& target,
                                          const RealMatrix& cond, std::uint64_t seed);

}  // namespace causalrt

#endif  // CAUSALRT_DIFFUSION_HPP
