#ifndef CAUSALRT_SCM_HPP
#define CAUSALRT_SCM_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "causalrt/dataset.hpp"
#include "causalrt/diffusion.hpp"
#include "causalrt/graph.hpp"
#include "causalrt/preprocess.hpp"

namespace causalrt {

enum class MechanismKind { kEmpirical, kAnm, kDiffusion };

enum class AnmRegressorKind { kMlp, kLinear };

struct AnmConfig {
  AnmRegressorKind regressor = AnmRegressorKind::kMlp;
  int hidden_dim = 32;
  int num_blocks = 1;
  Activation activation = Activation::kSilu;
  double learning_rate = 1e-3;
  int epochs = 300;
  int batch_size = 128;
};

struct NodeModelConfig {
  MechanismKind kind = MechanismKind::kDiffusion;
  DiffusionConfig diffusion;
  AnmConfig anm;
};

struct ScmConfig {
  std::map<std::string, NodeModelConfig> nodes;  // one entry per graph node
};

// Additive-noise mechanism v = f(parents) + u in transformed target space.
// The regressor is either a small MLP or an exact least-squares linear model;
// a parentless ANM degenerates to intercept + Gaussian residual.
struct AnmModel {
  AnmConfig config;
  MlpParams mlp;
  std::vector<double> lin_weights;  // linear kind: one per condition slot, intercept last
  double residual_std = 0.0;
};

struct FittedMechanism {
  MechanismKind kind = MechanismKind::kEmpirical;
  std::vector<double> empirical;  // raw training values
  AnmModel anm;
  TrainedDenoiser denoiser;
};

struct FittedScm {
  CausalGraph graph;
  std::vector<std::string> topo;
  std::map<std::string, ColumnStats> stats;
  std::map<std::string, ConditionLayout> layout;
  std::map<std::string, FittedMechanism> mech;
  std::vector<ColumnKind> node_kinds;             // in graph.nodes order
  std::vector<std::vector<std::string>> node_labels;
};

// Abducted exogenous state for a batch of rows. Only nodes that were encoded
// appear; diffusion nodes carry the (x_T, x_{T-1}) latent pair, ANM nodes the
// transformed residual, empirical nodes the raw value itself.
struct NoiseProfile {
  std::map<std::string, LatentColumn> latent;
  std::map<std::string, std::vector<double>> residual;
  std::map<std::string, std::vector<double>> value;
};

// Fits one mechanism per node on the training table. Per-node seeds are
// derived from the run seed and the node name, so adding a node never
// perturbs the training of the others.
FittedScm fit_scm(const CausalGraph& g, const Dataset& train, const ScmConfig& cfg,
                  std::uint64_t seed);

// Ancestral sampling. Empirical roots draw a shared bootstrap row index per
// sample, preserving their joint distribution; diffusion nodes decode fresh
// terminal noise under the sampled parents.
Dataset sample_scm(const FittedScm& scm, std::int64_t n, std::uint64_t seed);

// Abduction for the listed nodes (all nodes if the list is empty), batched
// over the rows of `table`, conditioning on the factual parent values.
NoiseProfile encode_noise(const FittedScm& scm, const Dataset& table,
                          const std::vector<std::string>& nodes = {});

// Decodes one node column given abducted noise, conditioning on the parent
// values currently in `table`. When condition_changed is set, BELM nodes
// discard the stored factual auxiliary state and bootstrap a fresh one, which
// is the correct interventional decode; otherwise the exact stored pair is
// replayed. Returns raw-space values.
std::vector<double> decode_node(const FittedScm& scm, const std::string& node,
                                const Dataset& table, const NoiseProfile& noise,
                                bool condition_changed);

// Round-trip reconstruction error of one mechanism in transformed target
// space over the given rows (encode then factual decode). Exact-inversion
// mechanisms return values at float rounding level.
double measured_sre(const FittedScm& scm, const std::string& node, const Dataset& table);

}  // namespace causalrt

#endif  // CAUSALRT_SCM_HPP
