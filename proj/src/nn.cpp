#include "causalrt/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "eigen_map.hpp"

namespace causalrt {
namespace {

struct Layout {
  std::int64_t w0 = 0, b0 = 0;
  std::int64_t blk = 0;      // offset of first block
  std::int64_t blk_size = 0; // W1 b1 W2 b2
  std::int64_t wo = 0, bo = 0;
  std::int64_t total = 0;
};

Layout make_layout(const MlpSpec& s) {
  if (s.input_dim <= 0 || s.hidden_dim <= 0 || s.output_dim <= 0 || s.num_blocks < 0)
    throw std::invalid_argument("MlpSpec: dimensions must be positive, num_blocks >= 0");
  const std::int64_t in = s.input_dim, h = s.hidden_dim, out = s.output_dim;
  Layout l;
  l.w0 = 0;
  l.b0 = l.w0 + h * in;
  l.blk = l.b0 + h;
  l.blk_size = h * h + h + h * h + h;
  l.wo = l.blk + s.num_blocks * l.blk_size;
  l.bo = l.wo + out * h;
  l.total = l.bo + out;
  return l;
}

inline void apply_act(Activation act, const RealMatrix& pre, RealMatrix* post) {
  *post = RealMatrix(pre.rows, pre.cols);
  auto p = emap(pre);
  auto q = emap(*post);
  if (act == Activation::kSilu) {
    q = p.array() / (1.0 + (-p.array()).exp());
  } else {
    q = p.array().max(0.0);
  }
}

inline EMatrix act_grad(Activation act, const RealMatrix& pre) {
  auto p = emap(pre);
  if (act == Activation::kSilu) {
    EMatrix s = (1.0 / (1.0 + (-p.array()).exp())).matrix();
    return (s.array() * (1.0 + p.array() * (1.0 - s.array()))).matrix();
  }
  return (p.array() > 0.0).cast<double>().matrix();
}

}  // namespace

std::int64_t mlp_param_count(const MlpSpec& spec) { return make_layout(spec).total; }

MlpParams mlp_init(const MlpSpec& spec, Rng& rng) {
  const Layout l = make_layout(spec);
  MlpParams p;
  p.spec = spec;
  p.theta.assign(static_cast<std::size_t>(l.total), 0.0);
  auto kaiming = [&](std::int64_t off, std::int64_t count, double fan_in) {
    const double bound = std::sqrt(6.0 / fan_in);
    for (std::int64_t i = 0; i < count; ++i)
      p.theta[static_cast<std::size_t>(off + i)] = rng.uniform(-bound, bound);
  };
  const std::int64_t h = spec.hidden_dim;
  kaiming(l.w0, h * spec.input_dim, spec.input_dim);
  for (int k = 0; k < spec.num_blocks; ++k) {
    const std::int64_t base = l.blk + k * l.blk_size;
    kaiming(base, h * h, h);              // W1
    kaiming(base + h * h + h, h * h, h);  // W2
  }
  // Output head stays zero: a freshly initialized denoiser predicts 0.
  return p;
}

void mlp_forward(const MlpParams& params, const RealMatrix& x, RealMatrix* out, MlpWorkspace* ws) {
  const MlpSpec& s = params.spec;
  const Layout l = make_layout(s);
  if (static_cast<std::int64_t>(params.theta.size()) != l.total)
    throw std::invalid_argument("mlp_forward: parameter vector size does not match spec");
  if (x.cols != s.input_dim) throw std::invalid_argument("mlp_forward: input width mismatch");
  const std::int64_t n = x.rows, h = s.hidden_dim;
  const double* th = params.theta.data();

  MlpWorkspace local;
  MlpWorkspace& w = ws ? *ws : local;
  w.x = x;
  w.stage.assign(static_cast<std::size_t>(s.num_blocks) + 1, RealMatrix());
  w.blk_pre.assign(static_cast<std::size_t>(s.num_blocks), RealMatrix());
  w.blk_act.assign(static_cast<std::size_t>(s.num_blocks), RealMatrix());

  w.pre0 = RealMatrix(n, h);
  emap(w.pre0) = emap(x) * emap(th + l.w0, h, s.input_dim).transpose();
  emap(w.pre0).rowwise() += Eigen::RowVectorXd::Map(th + l.b0, h);
  apply_act(s.activation, w.pre0, &w.stage[0]);

  for (int k = 0; k < s.num_blocks; ++k) {
    const double* base = th + l.blk + k * l.blk_size;
    const double* w1 = base;
    const double* b1 = base + h * h;
    const double* w2 = b1 + h;
    const double* b2 = w2 + h * h;
    RealMatrix& pre = w.blk_pre[static_cast<std::size_t>(k)];
    pre = RealMatrix(n, h);
    emap(pre) = emap(w.stage[static_cast<std::size_t>(k)]) * emap(w1, h, h).transpose();
    emap(pre).rowwise() += Eigen::RowVectorXd::Map(b1, h);
    apply_act(s.activation, pre, &w.blk_act[static_cast<std::size_t>(k)]);
    RealMatrix& next = w.stage[static_cast<std::size_t>(k) + 1];
    next = RealMatrix(n, h);
    emap(next) = emap(w.stage[static_cast<std::size_t>(k)]) +
                 emap(w.blk_act[static_cast<std::size_t>(k)]) * emap(w2, h, h).transpose();
    emap(next).rowwise() += Eigen::RowVectorXd::Map(b2, h);
  }

  *out = RealMatrix(n, s.output_dim);
  emap(*out) = emap(w.stage[static_cast<std::size_t>(s.num_blocks)]) *
               emap(th + l.wo, s.output_dim, h).transpose();
  emap(*out).rowwise() += Eigen::RowVectorXd::Map(th + l.bo, s.output_dim);
}

void mlp_backward(const MlpParams& params, const MlpWorkspace& ws, const RealMatrix& grad_out,
                  AlignedVector* grad_theta, RealMatrix* grad_x) {
  const MlpSpec& s = params.spec;
  const Layout l = make_layout(s);
  const std::int64_t h = s.hidden_dim;
  if (grad_out.cols != s.output_dim || grad_out.rows != ws.x.rows)
    throw std::invalid_argument("mlp_backward: grad_out shape mismatch");
  const double* th = params.theta.data();
  grad_theta->assign(static_cast<std::size_t>(l.total), 0.0);
  double* g = grad_theta->data();

  const RealMatrix& last = ws.stage[static_cast<std::size_t>(s.num_blocks)];
  emap(g + l.wo, s.output_dim, h) = emap(grad_out).transpose() * emap(last);
  Eigen::RowVectorXd::Map(g + l.bo, s.output_dim) = emap(grad_out).colwise().sum();
  EMatrix gh = emap(grad_out) * emap(th + l.wo, s.output_dim, h);

  for (int k = s.num_blocks - 1; k >= 0; --k) {
    const double* base = th + l.blk + k * l.blk_size;
    double* gbase = g + l.blk + k * l.blk_size;
    const double* w1 = base;
    const double* w2 = base + h * h + h;
    double* gw1 = gbase;
    double* gb1 = gbase + h * h;
    double* gw2 = gb1 + h;
    double* gb2 = gw2 + h * h;
    const RealMatrix& act1 = ws.blk_act[static_cast<std::size_t>(k)];
    const RealMatrix& in_k = ws.stage[static_cast<std::size_t>(k)];

    emap(gw2, h, h) = gh.transpose() * emap(act1);
    Eigen::RowVectorXd::Map(gb2, h) = gh.colwise().sum();
    EMatrix gact1 = gh * emap(w2, h, h);
    EMatrix gpre1 = (gact1.array() * act_grad(s.activation, ws.blk_pre[static_cast<std::size_t>(k)]).array()).matrix();
    emap(gw1, h, h) = gpre1.transpose() * emap(in_k);
    Eigen::RowVectorXd::Map(gb1, h) = gpre1.colwise().sum();
    gh += gpre1 * emap(w1, h, h);
  }

  EMatrix gpre0 = (gh.array() * act_grad(s.activation, ws.pre0).array()).matrix();
  emap(g + l.w0, h, s.input_dim) = gpre0.transpose() * emap(ws.x);
  Eigen::RowVectorXd::Map(g + l.b0, h) = gpre0.colwise().sum();
  if (grad_x) {
    *grad_x = RealMatrix(ws.x.rows, s.input_dim);
    emap(*grad_x) = gpre0 * emap(th + l.w0, h, s.input_dim);
  }
}

void adam_update(AlignedVector& theta, const AlignedVector& grad, AdamState& state,
                 const AdamConfig& cfg) {
  if (theta.size() != grad.size())
    throw std::invalid_argument("adam_update: theta/grad size mismatch");
  if (state.m.empty()) {
    state.m.assign(theta.size(), 0.0);
    state.v.assign(theta.size(), 0.0);
    state.step = 0;
  }
  if (state.m.size() != theta.size())
    throw std::invalid_argument("adam_update: state size mismatch");
  state.step += 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    theta[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

std::vector<double> sinusoidal_embed(double t, int dim) {
  if (dim <= 0 || dim % 2 != 0)
    throw std::invalid_argument("sinusoidal_embed: dim must be positive and even");
  const int half = dim / 2;
  std::vector<double> out(static_cast<std::size_t>(dim));
  for (int i = 0; i < half; ++i) {
    const double w = std::pow(10000.0, -static_cast<double>(i) / half);
    out[static_cast<std::size_t>(i)] = std::sin(t * w);
    out[static_cast<std::size_t>(half + i)] = std::cos(t * w);
  }
  return out;
}

}  // namespace causalrt
