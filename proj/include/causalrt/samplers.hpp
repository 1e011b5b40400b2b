#ifndef CAUSALRT_SAMPLERS_HPP
#define CAUSALRT_SAMPLERS_HPP

#include <functional>
#include <vector>

#include "causalrt/schedule.hpp"

namespace causalrt {

enum class SamplerKind { kBelm, kDdim };

// Batched noise predictor: given n trajectory states at shared grid index t,
// fill eps with n predictions. Conditioning, guidance and the null branch are
// the caller's business; samplers only see this callback.
using EpsFn = std::function<void(const std::vector<double>& x, int t, std::vector<double>* eps)>;

// Latent code for a column of scalar trajectories. BELM carries the terminal
// pair (x_T, x_{T-1}); DDIM only needs x_T and leaves x_aux empty.
struct LatentColumn {
  SamplerKind kind = SamplerKind::kBelm;
  int grid_timesteps = 0;
  std::vector<double> x_terminal;
  std::vector<double> x_aux;
};

// One reverse step t -> t-1: x_prev = gamma_{t-1} (x_t - sigma_t eps)/gamma_t
// + sigma_{t-1} eps, with eps evaluated at (x_t, t) by the caller.
void ddim_step_down(const NoiseSchedule& s, int t, const std::vector<double>& x_t,
                    const std::vector<double>& eps, std::vector<double>* x_prev);
double ddim_step_down(const NoiseSchedule& s, int t, double x_t, double eps);

// Mirror step t -> t+1 used for deterministic encoding.
void ddim_step_up(const NoiseSchedule& s, int t, const std::vector<double>& x_t,
                  const std::vector<double>& eps, std::vector<double>* x_next);
double ddim_step_up(const NoiseSchedule& s, int t, double x_t, double eps);

void ddim_encode(const NoiseSchedule& s, const EpsFn& eps, const std::vector<double>& x0,
                 std::vector<double>* x_terminal);
void ddim_decode(const NoiseSchedule& s, const EpsFn& eps, const std::vector<double>& x_terminal,
                 std::vector<double>* x0);

// Three-point linear multistep coefficients at interior index i (1..T-1),
// expressed in (y = x/gamma, rho) coordinates where the probability-flow ODE
// is y' = eps. With h1 = rho_{i-1} - rho_i and h2 = rho_{i+1} - rho_i:
//   y_{i-1} = a y_i + b y_{i+1} + d eps(x_i, i),
//   b = (h1/h2)^2, a = 1 - b, d = h1 (h2 - h1) / h2.
// Matching Taylor expansions through second order fixes all three values, so
// local truncation is O(h^3); on a uniform grid this is the leapfrog rule
// (a = 0, b = 1, d = -2h). Because the only eps evaluation sits at the shared
// middle state, the relation can be solved exactly for either endpoint, which
// is what makes encode/decode a bit-level round trip.
struct BelmCoeffs {
  double a = 0.0;
  double b = 0.0;
  double d = 0.0;
};
BelmCoeffs belm_coefficients(const NoiseSchedule& s, int i);

// Encode bootstraps x_1 with one Euler (DDIM) step from x_0, then runs the
// inverted three-point relation up the grid. Returns the terminal pair.
void belm_encode(const NoiseSchedule& s, const EpsFn& eps, const std::vector<double>& x0,
                 std::vector<double>* x_terminal, std::vector<double>* x_aux);

// Exact inverse of belm_encode given the stored pair.
void belm_decode(const NoiseSchedule& s, const EpsFn& eps, const std::vector<double>& x_terminal,
                 const std::vector<double>& x_aux, std::vector<double>* x0);

// Decode from x_T alone: the auxiliary state is bootstrapped with one DDIM
// step under the current eps (used when sampling from the prior and when a
// counterfactual condition change invalidates the stored factual x_aux).
void belm_decode_generative(const NoiseSchedule& s, const EpsFn& eps,
                            const std::vector<double>& x_terminal, std::vector<double>* x0);

// Relative squared reconstruction error sum((a-b)^2) / sum(b^2).
double sre_measure(const std::vector<double>& reconstructed, const std::vector<double>& original);

}  // namespace causalrt

#endif  // CAUSALRT_SAMPLERS_HPP
