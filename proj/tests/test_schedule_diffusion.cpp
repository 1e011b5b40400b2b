#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "causalrt/diffusion.hpp"
#include "causalrt/rng.hpp"
#include "causalrt/schedule.hpp"

using namespace causalrt;

namespace {

// A tiny two-step schedule with hand-picked levels for step oracles.
NoiseSchedule hand_schedule() {
  NoiseSchedule s;
  s.timesteps = 2;
  s.alpha_bar = {1.0, 0.64, 0.25};
  s.beta = {0.0, 1.0 - 0.64, 1.0 - 0.25 / 0.64};
  s.gamma = {1.0, 0.8, 0.5};
  s.sigma = {0.0, 0.6, std::sqrt(0.75)};
  s.rho = {0.0, 0.75, std::sqrt(0.75) / 0.5};
  return s;
}

}  // namespace

TEST_CASE("schedule endpoints are pinned") {
  const NoiseSchedule s = linear_beta_schedule(100);
  REQUIRE(s.beta.size() == 101);
  REQUIRE(s.alpha_bar.size() == 101);
  CHECK(s.alpha_bar[0] == 1.0);
  CHECK(s.gamma[0] == 1.0);
  CHECK(s.sigma[0] == 0.0);
  CHECK(s.rho[0] == 0.0);
  CHECK(s.beta[0] == 0.0);
}

TEST_CASE("terminal signal level is invariant to grid resolution") {
  // alpha_bar(1) = exp(-(0.1 + 9.95)) regardless of T
  const double expected = std::exp(-10.05);
  for (const int t : {50, 100, 200, 400}) {
    const NoiseSchedule s = linear_beta_schedule(t);
    CHECK(s.alpha_bar.back() == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("schedule profile matches the closed form at interior points") {
  const NoiseSchedule s = linear_beta_schedule(200);
  for (const int t : {1, 17, 50, 123, 200}) {
    const double frac = static_cast<double>(t) / 200.0;
    const double expected = std::exp(-(0.1 * frac + 9.95 * frac * frac));
    CHECK(s.alpha_bar[t] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("schedule is monotone with valid betas") {
  const NoiseSchedule s = linear_beta_schedule(128);
  for (int t = 1; t <= 128; ++t) {
    CHECK(s.alpha_bar[t] < s.alpha_bar[t - 1]);
    CHECK(s.rho[t] > s.rho[t - 1]);
    CHECK(s.beta[t] > 0.0);
    CHECK(s.beta[t] < 1.0);
    // beta ties the consecutive alpha_bar ratio
    CHECK(s.alpha_bar[t] / s.alpha_bar[t - 1] == doctest::Approx(1.0 - s.beta[t]).epsilon(1e-12));
    CHECK(s.gamma[t] == doctest::Approx(std::sqrt(s.alpha_bar[t])).epsilon(1e-12));
    CHECK(s.sigma[t] == doctest::Approx(std::sqrt(1.0 - s.alpha_bar[t])).epsilon(1e-12));
  }
}

TEST_CASE("schedule rejects tiny grids") {
  CHECK_THROWS_AS(linear_beta_schedule(3), std::invalid_argument);
  CHECK_THROWS_AS(linear_beta_schedule(0), std::invalid_argument);
}

TEST_CASE("q_sample mixes signal and noise by the schedule") {
  const NoiseSchedule s = hand_schedule();
  // gamma_2 x0 + sigma_2 eps = 0.5 * 2 + sqrt(0.75) * 1
  CHECK(q_sample(s, 2, 2.0, 1.0) == doctest::Approx(1.0 + std::sqrt(0.75)).epsilon(1e-15));
  // t = 0 returns x0 untouched
  CHECK(q_sample(s, 0, 2.0, 1.0) == 2.0);
}

TEST_CASE("xhat_zero inverts q_sample") {
  const NoiseSchedule s = hand_schedule();
  const double x0 = -0.7, eps = 0.9;
  const double xt = q_sample(s, 2, x0, eps);
  CHECK(xhat_zero(s, 2, xt, eps) == doctest::Approx(x0).epsilon(1e-12));
}

TEST_CASE("cfg mix recovers the conditional branch at w = 0") {
  CHECK(cfg_mix(0.3, -0.8, 0.0) == 0.3);
  // (1+w) c - w u
  CHECK(cfg_mix(1.0, 0.5, 2.0) == doctest::Approx(3.0 * 1.0 - 2.0 * 0.5));
}

TEST_CASE("categorical cross entropy oracle") {
  // logits -(0-0)^2/0.5 = 0 and -(0-1)^2/0.5 = -2; CE = log(1 + exp(-2))
  CHECK(categorical_cross_entropy(0.0, 0, 2, 0.5) ==
        doctest::Approx(std::log(1.0 + std::exp(-2.0))).epsilon(1e-12));
  // a far away xhat0 makes the wrong class expensive
  CHECK(categorical_cross_entropy(0.0, 1, 2, 0.5) > 1.9);
  CHECK_THROWS_AS(categorical_cross_entropy(0.0, 2, 2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(categorical_cross_entropy(0.0, -1, 2, 0.5), std::invalid_argument);
}

TEST_CASE("hybrid loss with lambda zero is exactly the simple loss") {
  Rng rng(21);
  std::vector<double> eps_hat(64), eps(64), xhat0(64), target(64);
  for (int i = 0; i < 64; ++i) {
    eps_hat[i] = rng.normal();
    eps[i] = rng.normal();
    xhat0[i] = rng.normal();
    target[i] = rng.normal();
  }
  const double simple = loss_simple(eps_hat, eps);
  const double hybrid =
      loss_hybrid(eps_hat, eps, xhat0, target, TargetKind::kContinuous, 0.0, 0, 0.5);
  CHECK(hybrid == simple);  // bitwise, not approximately
}

TEST_CASE("hybrid loss adds the continuous task term") {
  std::vector<double> eps_hat = {1.0, 0.0};
  std::vector<double> eps = {0.0, 0.0};
  std::vector<double> xhat0 = {2.0, 1.0};
  std::vector<double> target = {0.0, 1.0};
  // mean eps sq err = 0.5; mean task = (4 + 0) / 2 = 2
  const double l =
      loss_hybrid(eps_hat, eps, xhat0, target, TargetKind::kContinuous, 0.5, 0, 0.5);
  CHECK(l == doctest::Approx(0.5 + 0.5 * 2.0).epsilon(1e-12));
}

TEST_CASE("hybrid loss categorical branch uses the cross entropy") {
  std::vector<double> eps_hat = {0.0};
  std::vector<double> eps = {0.0};
  std::vector<double> xhat0 = {0.0};
  std::vector<double> target = {0.0};  // label 0
  const double ce = categorical_cross_entropy(0.0, 0, 2, 0.5);
  const double l =
      loss_hybrid(eps_hat, eps, xhat0, target, TargetKind::kCategorical, 2.0, 2, 0.5);
  CHECK(l == doctest::Approx(2.0 * ce).epsilon(1e-12));
}

TEST_CASE("denoiser input dim bundles value, time, condition and null flag") {
  CHECK(denoiser_input_dim(32, 0) == 1 + 32 + 0 + 1);
  CHECK(denoiser_input_dim(16, 5) == 1 + 16 + 5 + 1);
}

TEST_CASE("training is deterministic and reduces the loss") {
  DiffusionConfig cfg;
  cfg.timesteps = 50;
  cfg.hidden_dim = 24;
  cfg.num_blocks = 1;
  cfg.time_embed_dim = 8;
  cfg.epochs = 30;
  cfg.batch_size = 64;
  cfg.learning_rate = 1e-3;
  Rng rng(33);
  std::vector<double> target(256);
  for (auto& v : target) v = rng.normal();
  RealMatrix cond;  // unconditional

  const TrainedDenoiser a = train_diffusion_mechanism(cfg, target, cond, 5);
  const TrainedDenoiser b = train_diffusion_mechanism(cfg, target, cond, 5);
  REQUIRE(a.params.theta.size() == b.params.theta.size());
  bool identical = true;
  for (std::size_t i = 0; i < a.params.theta.size(); ++i)
    identical = identical && a.params.theta[i] == b.params.theta[i];
  CHECK(identical);

  REQUIRE(a.epoch_loss.size() == 30);
  // averaged over the last epochs the loss should be well below the start
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 5; ++i) head += a.epoch_loss[i];
  for (int i = 25; i < 30; ++i) tail += a.epoch_loss[i];
  CHECK(tail < head);

  const TrainedDenoiser c = train_diffusion_mechanism(cfg, target, cond, 6);
  bool differ = false;
  for (std::size_t i = 0; i < a.params.theta.size(); ++i)
    differ = differ || a.params.theta[i] != c.params.theta[i];
  CHECK(differ);
}

TEST_CASE("eps_predict null branch ignores the condition values") {
  DiffusionConfig cfg;
  cfg.timesteps = 50;
  cfg.hidden_dim = 16;
  cfg.num_blocks = 1;
  cfg.time_embed_dim = 8;
  cfg.epochs = 5;
  cfg.batch_size = 32;
  Rng rng(8);
  std::vector<double> target(128);
  RealMatrix cond(128, 1);
  for (int i = 0; i < 128; ++i) {
    cond(i, 0) = rng.normal();
    target[i] = 0.5 * cond(i, 0) + 0.1 * rng.normal();
  }
  const TrainedDenoiser d = train_diffusion_mechanism(cfg, target, cond, 3);

  std::vector<double> x = {0.1, -0.4};
  RealMatrix c1(2, 1), c2(2, 1);
  c1(0, 0) = 5.0;
  c1(1, 0) = -3.0;
  c2(0, 0) = 0.0;
  c2(1, 0) = 0.25;
  std::vector<double> e1, e2, e3, e4;
  eps_predict(d, x, 10, c1, true, &e1);
  eps_predict(d, x, 10, c2, true, &e2);
  CHECK(e1[0] == e2[0]);
  CHECK(e1[1] == e2[1]);
  // while the conditional branch does depend on it
  eps_predict(d, x, 10, c1, false, &e3);
  eps_predict(d, x, 10, c2, false, &e4);
  CHECK(e3[0] != e4[0]);
}
