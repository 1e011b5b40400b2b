#ifndef CAUSALRT_NN_HPP
#define CAUSALRT_NN_HPP

#include <cstdint>
#include <vector>

#include "causalrt/matrix.hpp"
#include "causalrt/rng.hpp"

namespace causalrt {

enum class Activation { kSilu, kRelu };

// Fully connected net: input layer -> num_blocks residual blocks -> linear
// output head. A residual block computes h + W2 act(W1 h + c1) + c2.
struct MlpSpec {
  int input_dim = 0;
  int hidden_dim = 0;
  int output_dim = 0;
  int num_blocks = 2;
  Activation activation = Activation::kSilu;
};

// Parameters live in one flat vector so the optimizer never has to know the
// topology. Layout: [W0 | b0 | per block: W1 b1 W2 b2 | Wout | bout], all
// weight matrices row-major with shape (out_dim x in_dim).
struct MlpParams {
  MlpSpec spec;
  AlignedVector theta;
};

std::int64_t mlp_param_count(const MlpSpec& spec);

// Kaiming-uniform fan-in init for hidden layers, zero biases, zero output
// head (the net starts as the constant-zero function).
MlpParams mlp_init(const MlpSpec& spec, Rng& rng);

// Cached activations from one forward pass, consumed by mlp_backward.
struct MlpWorkspace {
  RealMatrix x;
  RealMatrix pre0;
  std::vector<RealMatrix> stage;    // stage[0] = post input layer, stage[k+1] = post block k
  std::vector<RealMatrix> blk_pre;  // pre-activation inside block k
  std::vector<RealMatrix> blk_act;
};

void mlp_forward(const MlpParams& params, const RealMatrix& x, RealMatrix* out,
                 MlpWorkspace* ws = nullptr);

// grad_out is dLoss/d(output), shape (batch x output_dim). grad_theta is
// overwritten. grad_x, when requested, receives dLoss/d(input).
void mlp_backward(const MlpParams& params, const MlpWorkspace& ws, const RealMatrix& grad_out,
                  AlignedVector* grad_theta, RealMatrix* grad_x = nullptr);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

void adam_update(AlignedVector& theta, const AlignedVector& grad, AdamState& state,
                 const AdamConfig& cfg);

// Transformer-style embedding: [sin(t w_0).. sin(t w_{d/2-1}), cos(..)] with
// w_i = 10000^(-i/(d/2)). dim must be even and positive.
std::vector<double> sinusoidal_embed(double t, int dim);

}  // namespace causalrt

#endif  // CAUSALRT_NN_HPP
