#ifndef CAUSALRT_SCHEDULE_HPP
#define CAUSALRT_SCHEDULE_HPP

#include <vector>

namespace causalrt {

// Forward-process constants on the grid t = 0..T. alpha_bar[0] == 1 exactly,
// so gamma[0] == 1 and rho[0] == 0; every array has T+1 entries, beta[0] is a
// placeholder zero.
struct NoiseSchedule {
  int timesteps = 0;
  std::vector<double> beta;
  std::vector<double> alpha_bar;
  std::vector<double> gamma;  // sqrt(alpha_bar)
  std::vector<double> sigma;  // sqrt(1 - alpha_bar)
  std::vector<double> rho;    // sigma/gamma, strictly increasing
};

// Linear-beta forward process discretized at T steps. The continuous profile
// is the standard one (beta ramping 1e-4 -> 0.02 over a thousand steps), kept
// fixed across T: alpha_bar(s) = exp(-(0.1 s + 9.95 s^2)) with s = t/T. That
// way alpha_bar(T) ~= 4.3e-5 no matter how coarse the grid is, and sweeping T
// refines one fixed trajectory instead of changing the terminal noise level.
NoiseSchedule linear_beta_schedule(int timesteps);

}  // namespace causalrt

#endif  // CAUSALRT_SCHEDULE_HPP
