#include "causalrt/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace causalrt {

NoiseSchedule linear_beta_schedule(int timesteps) {
  if (timesteps < 4) throw std::invalid_argument("linear_beta_schedule: need timesteps >= 4");
  NoiseSchedule s;
  s.timesteps = timesteps;
  const std::size_t n = static_cast<std::size_t>(timesteps) + 1;
  s.beta.assign(n, 0.0);
  s.alpha_bar.assign(n, 0.0);
  s.gamma.assign(n, 0.0);
  s.sigma.assign(n, 0.0);
  s.rho.assign(n, 0.0);
  for (int t = 0; t <= timesteps; ++t) {
    const double frac = static_cast<double>(t) / timesteps;
    const double ab = std::exp(-(0.1 * frac + 9.95 * frac * frac));
    const std::size_t i = static_cast<std::size_t>(t);
    s.alpha_bar[i] = ab;
    s.gamma[i] = std::sqrt(ab);
    s.sigma[i] = std::sqrt(1.0 - ab);
    s.rho[i] = s.sigma[i] / s.gamma[i];
    if (t > 0) s.beta[i] = 1.0 - ab / s.alpha_bar[i - 1];
  }
  s.alpha_bar[0] = 1.0;  // exact, so rho[0] == 0 with no rounding residue
  s.gamma[0] = 1.0;
  s.sigma[0] = 0.0;
  s.rho[0] = 0.0;
  return s;
}

}  // namespace causalrt
