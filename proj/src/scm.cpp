#include "causalrt/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "eigen_map.hpp"

namespace causalrt {
namespace {

std::vector<double> anm_predict(const AnmModel& m, const RealMatrix& cond) {
  const std::int64_t n = cond.rows;
  std::vector<double> out(static_cast<std::size_t>(n));
  if (!m.lin_weights.empty()) {
    const std::size_t w = m.lin_weights.size();
    for (std::int64_t r = 0; r < n; ++r) {
      double acc = m.lin_weights[w - 1];  // intercept
      for (std::size_t c = 0; c + 1 < w; ++c)
        acc += m.lin_weights[c] * cond(r, static_cast<std::int64_t>(c));
      out[static_cast<std::size_t>(r)] = acc;
    }
    return out;
  }
  RealMatrix pred;
  mlp_forward(m.mlp, cond, &pred);
  for (std::int64_t r = 0; r < n; ++r) out[static_cast<std::size_t>(r)] = pred(r, 0);
  return out;
}

AnmModel train_anm(const AnmConfig& cfg, const std::vector<double>& target,
                   const RealMatrix& cond, std::uint64_t seed) {
  const std::int64_t n = static_cast<std::int64_t>(target.size());
  if (n < 2) throw std::invalid_argument("train_anm: need at least two rows");
  AnmModel model;
  model.config = cfg;

  const bool linear = cfg.regressor == AnmRegressorKind::kLinear || cond.cols == 0;
  if (linear) {
    const std::int64_t p = cond.cols + 1;
    EMatrix x(n, p);
    Eigen::VectorXd y(n);
    for (std::int64_t r = 0; r < n; ++r) {
      for (std::int64_t c = 0; c < cond.cols; ++c) x(r, c) = cond(r, c);
      x(r, p - 1) = 1.0;
      y(r) = target[static_cast<std::size_t>(r)];
    }
    // One-hot parent blocks plus the intercept make the design rank deficient.
    // Zero near-null singular directions so the solve returns the minimum-norm
    // least-squares weights instead of huge cancelling coefficients.
    Eigen::BDCSVD<EMatrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-8);
    Eigen::VectorXd w = svd.solve(y);
    model.lin_weights.assign(w.data(), w.data() + p);
  } else {
    if (cfg.epochs <= 0 || cfg.batch_size <= 0 || cfg.learning_rate <= 0.0)
      throw std::invalid_argument("train_anm: bad optimizer settings");
    MlpSpec spec;
    spec.input_dim = static_cast<int>(cond.cols);
    spec.hidden_dim = cfg.hidden_dim;
    spec.output_dim = 1;
    spec.num_blocks = cfg.num_blocks;
    spec.activation = cfg.activation;
    Rng rng(seed);
    model.mlp = mlp_init(spec, rng);

    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const std::int64_t bs = std::min<std::int64_t>(cfg.batch_size, n);
    RealMatrix in(bs, cond.cols);
    AdamConfig aopt;
    aopt.learning_rate = cfg.learning_rate;
    AdamState astate;
    AlignedVector grad;
    MlpWorkspace ws;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      rng.shuffle(order);
      for (std::int64_t start = 0; start + bs <= n; start += bs) {
        for (std::int64_t j = 0; j < bs; ++j) {
          const std::int64_t row = order[static_cast<std::size_t>(start + j)];
          std::copy(cond.row_ptr(row), cond.row_ptr(row) + cond.cols, in.row_ptr(j));
        }
        RealMatrix out;
        mlp_forward(model.mlp, in, &out, &ws);
        RealMatrix gout(bs, 1);
        double loss = 0.0;
        for (std::int64_t j = 0; j < bs; ++j) {
          const std::int64_t row = order[static_cast<std::size_t>(start + j)];
          const double diff = out(j, 0) - target[static_cast<std::size_t>(row)];
          loss += diff * diff;
          gout(j, 0) = 2.0 * diff / static_cast<double>(bs);
        }
        if (!std::isfinite(loss)) throw std::runtime_error("train_anm: loss diverged");
        mlp_backward(model.mlp, ws, gout, &grad);
        adam_update(model.mlp.theta, grad, astate, aopt);
      }
    }
  }

  const std::vector<double> fit = anm_predict(model, cond);
  double mean = 0.0;
  for (std::int64_t r = 0; r < n; ++r)
    mean += target[static_cast<std::size_t>(r)] - fit[static_cast<std::size_t>(r)];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::int64_t r = 0; r < n; ++r) {
    const double u = target[static_cast<std::size_t>(r)] - fit[static_cast<std::size_t>(r)] - mean;
    ss += u * u;
  }
  model.residual_std = std::sqrt(ss / static_cast<double>(n - 1));
  return model;
}

std::vector<double> transformed_target(const FittedScm& scm, const std::string& node,
                                       const Dataset& table) {
  const ColumnStats& st = scm.stats.at(node);
  std::vector<double> v = table.column(node);
  for (double& x : v) x = transform_target(st, x);
  return v;
}

const FittedMechanism& mech_of(const FittedScm& scm, const std::string& node) {
  const auto it = scm.mech.find(node);
  if (it == scm.mech.end()) throw std::invalid_argument("FittedScm: unknown node '" + node + "'");
  return it->second;
}

}  // namespace

FittedScm fit_scm(const CausalGraph& g, const Dataset& train, const ScmConfig& cfg,
                  std::uint64_t seed) {
  train.check_consistent();
  FittedScm scm;
  scm.graph = g;
  scm.topo = topo_order(g);
  if (train.num_rows() < 2) throw std::invalid_argument("fit_scm: need at least two rows");

  for (const auto& node : g.nodes) {
    const std::int64_t c = train.col_index(node);
    if (c < 0) throw std::invalid_argument("fit_scm: graph node '" + node + "' not in dataset");
    scm.node_kinds.push_back(train.kinds[static_cast<std::size_t>(c)]);
    scm.node_labels.push_back(train.labels[static_cast<std::size_t>(c)]);
    scm.stats[node] = fit_column_stats(train, node);
  }
  for (const auto& node : g.nodes)
    scm.layout[node] = make_condition_layout(g, node, scm.stats);

  for (const auto& node : scm.topo) {
    const auto cit = cfg.nodes.find(node);
    if (cit == cfg.nodes.end())
      throw std::invalid_argument("fit_scm: no mechanism configured for node '" + node + "'");
    const NodeModelConfig& nc = cit->second;
    const ColumnStats& st = scm.stats.at(node);
    FittedMechanism m;
    m.kind = nc.kind;
    const std::uint64_t node_seed = derive_seed(seed, node);

    switch (nc.kind) {
      case MechanismKind::kEmpirical: {
        if (!g.is_root(node))
          throw std::invalid_argument("fit_scm: empirical mechanism on non-root node '" + node + "'");
        m.empirical = train.column(node);
        break;
      }
      case MechanismKind::kAnm: {
        if (st.kind != ColumnKind::kContinuous)
          throw std::invalid_argument("fit_scm: ANM needs a continuous target ('" + node + "')");
        const RealMatrix cond = build_condition(train, scm.layout.at(node));
        m.anm = train_anm(nc.anm, transformed_target(scm, node, train), cond, node_seed);
        break;
      }
      case MechanismKind::kDiffusion: {
        DiffusionConfig dc = nc.diffusion;
        if (st.kind == ColumnKind::kCategorical) {
          dc.target = TargetKind::kCategorical;
          dc.num_classes = st.num_classes;
        } else {
          dc.target = TargetKind::kContinuous;
          dc.num_classes = 0;
        }
        const RealMatrix cond = build_condition(train, scm.layout.at(node));
        m.denoiser =
            train_diffusion_mechanism(dc, transformed_target(scm, node, train), cond, node_seed);
        break;
      }
    }
    scm.mech[node] = std::move(m);
  }
  return scm;
}

Dataset sample_scm(const FittedScm& scm, std::int64_t n, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("sample_scm: n must be positive");
  std::int64_t train_rows = -1;
  for (const auto& [node, m] : scm.mech)
    if (m.kind == MechanismKind::kEmpirical) train_rows = static_cast<std::int64_t>(m.empirical.size());

  Dataset out;
  out.names = scm.graph.nodes;
  for (std::size_t i = 0; i < scm.graph.nodes.size(); ++i) {
    out.kinds.push_back(scm.node_kinds[i]);
    out.labels.push_back(scm.node_labels[i]);
  }
  out.values = RealMatrix(n, static_cast<std::int64_t>(out.names.size()));

  Rng rng(seed);
  std::vector<std::int64_t> boot(static_cast<std::size_t>(n), 0);
  if (train_rows > 0)
    for (auto& b : boot) b = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(train_rows)));

  for (const auto& node : scm.topo) {
    const FittedMechanism& m = mech_of(scm, node);
    const std::int64_t c = out.col_index_checked(node);
    const ColumnStats& st = scm.stats.at(node);
    switch (m.kind) {
      case MechanismKind::kEmpirical: {
        for (std::int64_t r = 0; r < n; ++r)
          out.values(r, c) = m.empirical[static_cast<std::size_t>(boot[static_cast<std::size_t>(r)])];
        break;
      }
      case MechanismKind::kAnm: {
        const RealMatrix cond = build_condition(out, scm.layout.at(node));
        std::vector<double> f = anm_predict(m.anm, cond);
        for (std::int64_t r = 0; r < n; ++r) {
          const double v = f[static_cast<std::size_t>(r)] + rng.normal(0.0, m.anm.residual_std);
          out.values(r, c) = inverse_target(st, v);
        }
        break;
      }
      case MechanismKind::kDiffusion: {
        std::vector<double> x_terminal(static_cast<std::size_t>(n));
        for (auto& x : x_terminal) x = rng.normal();
        const EpsFn eps = make_eps_fn(m.denoiser, build_condition(out, scm.layout.at(node)));
        std::vector<double> x0;
        if (m.denoiser.config.sampler == SamplerKind::kBelm)
          belm_decode_generative(m.denoiser.schedule, eps, x_terminal, &x0);
        else
          ddim_decode(m.denoiser.schedule, eps, x_terminal, &x0);
        for (std::int64_t r = 0; r < n; ++r)
          out.values(r, c) = inverse_target(st, x0[static_cast<std::size_t>(r)]);
        break;
      }
    }
  }
  return out;
}

NoiseProfile encode_noise(const FittedScm& scm, const Dataset& table,
                          const std::vector<std::string>& nodes) {
  NoiseProfile profile;
  const std::vector<std::string>& wanted = nodes.empty() ? scm.graph.nodes : nodes;
  for (const auto& node : wanted) {
    const FittedMechanism& m = mech_of(scm, node);
    switch (m.kind) {
      case MechanismKind::kEmpirical: {
        profile.value[node] = table.column(node);
        break;
      }
      case MechanismKind::kAnm: {
        const RealMatrix cond = build_condition(table, scm.layout.at(node));
        const std::vector<double> f = anm_predict(m.anm, cond);
        std::vector<double> u = transformed_target(scm, node, table);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] -= f[i];
        profile.residual[node] = std::move(u);
        break;
      }
      case MechanismKind::kDiffusion: {
        const EpsFn eps = make_eps_fn(m.denoiser, build_condition(table, scm.layout.at(node)));
        const std::vector<double> x0 = transformed_target(scm, node, table);
        LatentColumn lat;
        lat.kind = m.denoiser.config.sampler;
        lat.grid_timesteps = m.denoiser.schedule.timesteps;
        if (lat.kind == SamplerKind::kBelm)
          belm_encode(m.denoiser.schedule, eps, x0, &lat.x_terminal, &lat.x_aux);
        else
          ddim_encode(m.denoiser.schedule, eps, x0, &lat.x_terminal);
        profile.latent[node] = std::move(lat);
        break;
      }
    }
  }
  return profile;
}

std::vector<double> decode_node(const FittedScm& scm, const std::string& node,
                                const Dataset& table, const NoiseProfile& noise,
                                bool condition_changed) {
  const FittedMechanism& m = mech_of(scm, node);
  const ColumnStats& st = scm.stats.at(node);
  const std::int64_t n = table.num_rows();
  std::vector<double> out;
  switch (m.kind) {
    case MechanismKind::kEmpirical: {
      const auto it = noise.value.find(node);
      if (it == noise.value.end())
        throw std::invalid_argument("decode_node: no abducted value for '" + node + "'");
      out = it->second;
      break;
    }
    case MechanismKind::kAnm: {
      const auto it = noise.residual.find(node);
      if (it == noise.residual.end())
        throw std::invalid_argument("decode_node: no abducted residual for '" + node + "'");
      if (static_cast<std::int64_t>(it->second.size()) != n)
        throw std::invalid_argument("decode_node: residual length mismatch for '" + node + "'");
      const RealMatrix cond = build_condition(table, scm.layout.at(node));
      out = anm_predict(m.anm, cond);
      for (std::int64_t r = 0; r < n; ++r) {
        out[static_cast<std::size_t>(r)] += it->second[static_cast<std::size_t>(r)];
        out[static_cast<std::size_t>(r)] = inverse_target(st, out[static_cast<std::size_t>(r)]);
      }
      break;
    }
    case MechanismKind::kDiffusion: {
      const auto it = noise.latent.find(node);
      if (it == noise.latent.end())
        throw std::invalid_argument("decode_node: no abducted latent for '" + node + "'");
      const LatentColumn& lat = it->second;
      if (static_cast<std::int64_t>(lat.x_terminal.size()) != n)
        throw std::invalid_argument("decode_node: latent length mismatch for '" + node + "'");
      if (lat.grid_timesteps != m.denoiser.schedule.timesteps)
        throw std::invalid_argument("decode_node: latent grid does not match mechanism grid");
      if (lat.kind != m.denoiser.config.sampler)
        throw std::invalid_argument("decode_node: latent sampler does not match mechanism");
      const EpsFn eps = make_eps_fn(m.denoiser, build_condition(table, scm.layout.at(node)));
      std::vector<double> x0;
      if (lat.kind == SamplerKind::kBelm) {
        if (condition_changed)
          belm_decode_generative(m.denoiser.schedule, eps, lat.x_terminal, &x0);
        else
          belm_decode(m.denoiser.schedule, eps, lat.x_terminal, lat.x_aux, &x0);
      } else {
        ddim_decode(m.denoiser.schedule, eps, lat.x_terminal, &x0);
      }
      out.resize(static_cast<std::size_t>(n));
      for (std::int64_t r = 0; r < n; ++r)
        out[static_cast<std::size_t>(r)] = inverse_target(st, x0[static_cast<std::size_t>(r)]);
      break;
    }
  }
  return out;
}

double measured_sre(const FittedScm& scm, const std::string& node, const Dataset& table) {
  const FittedMechanism& m = mech_of(scm, node);
  const std::vector<double> original = transformed_target(scm, node, table);
  switch (m.kind) {
    case MechanismKind::kEmpirical:
      return 0.0;
    case MechanismKind::kAnm: {
      const RealMatrix cond = build_condition(table, scm.layout.at(node));
      const std::vector<double> f = anm_predict(m.anm, cond);
      std::vector<double> recon(original.size());
      for (std::size_t i = 0; i < original.size(); ++i)
        recon[i] = f[i] + (original[i] - f[i]);
      return sre_measure(recon, original);
    }
    case MechanismKind::kDiffusion: {
      const EpsFn eps = make_eps_fn(m.denoiser, build_condition(table, scm.layout.at(node)));
      std::vector<double> recon;
      if (m.denoiser.config.sampler == SamplerKind::kBelm) {
        std::vector<double> xt, xaux;
        belm_encode(m.denoiser.schedule, eps, original, &xt, &xaux);
        belm_decode(m.denoiser.schedule, eps, xt, xaux, &recon);
      } else {
        std::vector<double> xt;
        ddim_encode(m.denoiser.schedule, eps, original, &xt);
        ddim_decode(m.denoiser.schedule, eps, xt, &recon);
      }
      return sre_measure(recon, original);
    }
  }
  return 0.0;
}

}  // namespace causalrt
