#include "causalrt/samplers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace causalrt {
namespace {

void check_finite(const std::vector<double>& x, int t, const char* where) {
  for (double v : x) {
    if (!std::isfinite(v))
      throw std::runtime_error(std::string(where) + ": trajectory diverged at t=" + std::to_string(t));
  }
}

void check_grid(const NoiseSchedule& s, int t, int lo, int hi, const char* where) {
  if (t < lo || t > hi)
    throw std::invalid_argument(std::string(where) + ": grid index " + std::to_string(t) +
                                " outside [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
  if (s.timesteps < 4) throw std::invalid_argument(std::string(where) + ": schedule not initialized");
}

}  // namespace

double ddim_step_down(const NoiseSchedule& s, int t, double x_t, double eps) {
  check_grid(s, t, 1, s.timesteps, "ddim_step_down");
  const std::size_t i = static_cast<std::size_t>(t);
  return s.gamma[i - 1] * (x_t - s.sigma[i] * eps) / s.gamma[i] + s.sigma[i - 1] * eps;
}

double ddim_step_up(const NoiseSchedule& s, int t, double x_t, double eps) {
  check_grid(s, t, 0, s.timesteps - 1, "ddim_step_up");
  const std::size_t i = static_cast<std::size_t>(t);
  return s.gamma[i + 1] * (x_t - s.sigma[i] * eps) / s.gamma[i] + s.sigma[i + 1] * eps;
}

void ddim_step_down(const NoiseSchedule& s, int t, const std::vector<double>& x_t,
                    const std::vector<double>& eps, std::vector<double>* x_prev) {
  if (x_t.size() != eps.size()) throw std::invalid_argument("ddim_step_down: size mismatch");
  x_prev->resize(x_t.size());
  for (std::size_t j = 0; j < x_t.size(); ++j) (*x_prev)[j] = ddim_step_down(s, t, x_t[j], eps[j]);
}

void ddim_step_up(const NoiseSchedule& s, int t, const std::vector<double>& x_t,
                  const std::vector<double>& eps, std::vector<double>* x_next) {
  if (x_t.size() != eps.size()) throw std::invalid_argument("ddim_step_up: size mismatch");
  x_next->resize(x_t.size());
  for (std::size_t j = 0; j < x_t.size(); ++j) (*x_next)[j] = ddim_step_up(s, t, x_t[j], eps[j]);
}

void ddim_encode(const NoiseSchedule& s, const EpsFn& eps, const std::vector<double>& x0,
                 std::vector<double>* x_terminal) {
  std::vector<double> x = x0;
  std::vector<double> e;
  for (int t = 0; t < s.timesteps; ++t) {
    eps(x, t, &e);
    ddim_step_up(s, t, x, e, &x);
    check_finite(x, t + 1, "ddim_encode");
  }
  *x_terminal = std::move(x);
}

void ddim_decode(const NoiseSchedule& s, const EpsFn& eps, const std::vector<double>& x_terminal,
                 std::vector<double>* x0) {
  std::vector<double> x = x_terminal;
  std::vector<double> e;
  for (int t = s.timesteps; t > 0; --t) {
    eps(x, t, &e);
    ddim_step_down(s, t, x, e, &x);
    check_finite(x, t - 1, "ddim_decode");
  }
  *x0 = std::move(x);
}

BelmCoeffs belm_coefficients(const NoiseSchedule& s, int i) {
  check_grid(s, i, 1, s.timesteps - 1, "belm_coefficients");
  const std::size_t k = static_cast<std::size_t>(i);
  const double h1 = s.rho[k - 1] - s.rho[k];
  const double h2 = s.rho[k + 1] - s.rho[k];
  BelmCoeffs c;
  c.b = (h1 / h2) * (h1 / h2);
  c.a = 1.0 - c.b;
  c.d = h1 * (h2 - h1) / h2;
  return c;
}

void belm_encode(const NoiseSchedule& s, const EpsFn& eps, const std::vector<double>& x0,
                 std::vector<double>* x_terminal, std::vector<double>* x_aux) {
  const std::size_t n = x0.size();
  const int T = s.timesteps;
  std::vector<double> y_prev = x0;  // y_0 (gamma_0 == 1)
  std::vector<double> e;
  eps(x0, 0, &e);
  std::vector<double> y_cur(n);
  for (std::size_t j = 0; j < n; ++j) y_cur[j] = x0[j] + (s.rho[1] - s.rho[0]) * e[j];

  std::vector<double> x_i(n), y_next(n);
  for (int i = 1; i < T; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < n; ++j) x_i[j] = s.gamma[k] * y_cur[j];
    eps(x_i, i, &e);
    const BelmCoeffs c = belm_coefficients(s, i);
    for (std::size_t j = 0; j < n; ++j)
      y_next[j] = (y_prev[j] - c.a * y_cur[j] - c.d * e[j]) / c.b;
    check_finite(y_next, i + 1, "belm_encode");
    std::swap(y_prev, y_cur);
    std::swap(y_cur, y_next);
  }

  x_terminal->resize(n);
  x_aux->resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    (*x_terminal)[j] = s.gamma[static_cast<std::size_t>(T)] * y_cur[j];
    (*x_aux)[j] = s.gamma[static_cast<std::size_t>(T) - 1] * y_prev[j];
  }
}

void belm_decode(const NoiseSchedule& s, const EpsFn& eps, const std::vector<double>& x_terminal,
                 const std::vector<double>& x_aux, std::vector<double>* x0) {
  if (x_terminal.size() != x_aux.size())
    throw std::invalid_argument("belm_decode: terminal/aux size mismatch");
  const std::size_t n = x_terminal.size();
  const int T = s.timesteps;
  std::vector<double> y_hi(n), y_mid(n);
  for (std::size_t j = 0; j < n; ++j) {
    y_hi[j] = x_terminal[j] / s.gamma[static_cast<std::size_t>(T)];
    y_mid[j] = x_aux[j] / s.gamma[static_cast<std::size_t>(T) - 1];
  }

  std::vector<double> x_i(n), e, y_lo(n);
  for (int i = T - 1; i >= 1; --i) {
    const std::size_t k = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < n; ++j) x_i[j] = s.gamma[k] * y_mid[j];
    eps(x_i, i, &e);
    const BelmCoeffs c = belm_coefficients(s, i);
    for (std::size_t j = 0; j < n; ++j)
      y_lo[j] = c.a * y_mid[j] + c.b * y_hi[j] + c.d * e[j];
    check_finite(y_lo, i - 1, "belm_decode");
    std::swap(y_hi, y_mid);
    std::swap(y_mid, y_lo);
  }
  *x0 = std::move(y_mid);  // gamma_0 == 1
}

void belm_decode_generative(const NoiseSchedule& s, const EpsFn& eps,
                            const std::vector<double>& x_terminal, std::vector<double>* x0) {
  std::vector<double> e;
  eps(x_terminal, s.timesteps, &e);
  std::vector<double> x_aux;
  ddim_step_down(s, s.timesteps, x_terminal, e, &x_aux);
  belm_decode(s, eps, x_terminal, x_aux, x0);
}

double sre_measure(const std::vector<double>& reconstructed, const std::vector<double>& original) {
  if (reconstructed.size() != original.size())
    throw std::invalid_argument("sre_measure: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < original.size(); ++j) {
    const double d = reconstructed[j] - original[j];
    num += d * d;
    den += original[j] * original[j];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace causalrt
