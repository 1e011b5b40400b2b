#ifndef CAUSALRT_METRICS_HPP
#define CAUSALRT_METRICS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "causalrt/dataset.hpp"
#include "causalrt/graph.hpp"
#include "causalrt/matrix.hpp"

namespace causalrt {

// Relative squared noise-recovery error: both vectors are standardized to
// zero mean and unit sample variance first, then sum((u_hat-u)^2)/sum(u^2).
// Deliberately blind to affine reparameterization in scale/location only;
// a sign flip or nonlinear warp of an otherwise perfect recovery is penalized.
double delta_u(const std::vector<double>& u_hat, const std::vector<double>& u);

// Causal information conservation score exp(-(delta_u + delta_sre)).
double cic_score(double du, double dsre);

// Digamma via upward recurrence into the asymptotic series; absolute error
// below 1e-10 on x > 0.
double digamma(double x);

// Kraskov-style mutual information (max-norm, k-th neighbor, strict count).
double ksg_mi(const RealMatrix& x, const RealMatrix& y, int k = 5);

// Frenzel-Pompe conditional mutual information I(X;Y|Z).
double ksg_cmi(const RealMatrix& x, const RealMatrix& y, const RealMatrix& z, int k = 5);

// Median pairwise Euclidean distance over the rows (deterministic stride
// subsample above 2048 rows keeps this O(1) in memory).
double median_heuristic(const RealMatrix& pooled);

// Unbiased U-statistic MMD^2 with RBF kernel exp(-d^2 / (2 sigma^2)).
double mmd2_unbiased(const RealMatrix& x, const RealMatrix& y, double sigma);

struct MmdTestResult {
  double mmd2 = 0.0;
  double p_value = 1.0;
};

// Label-permutation null for the MMD statistic.
MmdTestResult mmd_permutation_test(const RealMatrix& x, const RealMatrix& y, double sigma,
                                   int permutations, std::uint64_t seed);

// exp(-gamma max(0, MMD^2)) between two blocks whose columns are standardized
// with the observed block's statistics. sigma <= 0 selects the median
// heuristic on the pooled standardized sample.
double kmd_score(const RealMatrix& observed, const RealMatrix& generated, double gamma = 1.0,
                 double sigma = 0.0);

// Mean squared latent magnitude; ~1 when the abducted noise matches the
// standard-normal prior.
double prior_matching_diagnostic(const std::vector<double>& latent);

// Per-edge CMI preservation: 1 - |I_obs - I_cf| / (I_obs + 1e-6), estimates
// clamped at zero before scoring, result clamped to [0,1].
double cmi_edge_score(double i_obs, double i_cf);

struct CmiEdge {
  std::string parent;
  std::string child;
  double i_obs = 0.0;
  double i_cf = 0.0;
  double score = 0.0;
};

struct CmiScoreReport {
  double aggregate = 0.0;
  std::vector<CmiEdge> edges;
  std::map<std::string, double> per_node;
};

// Edge-wise conditional dependence preservation between an observed table and
// a generated/counterfactual one: for each edge p -> c, I(p; c | other
// parents of c), KSG k-th neighbor, columns standardized (continuous) or
// one-hot (categorical) with observed-table statistics. Aggregate is the mean
// over nodes with at least one parent.
CmiScoreReport cmi_score(const CausalGraph& g, const Dataset& observed, const Dataset& generated,
                         int k = 5);

struct KmdReport {
  double aggregate = 0.0;
  std::map<std::string, double> per_node;
};

// Per-mechanism kernel distribution match on the joint (node + parents)
// block, observed vs generated; aggregate is the mean over non-root nodes.
KmdReport kmd_score_scm(const CausalGraph& g, const Dataset& observed, const Dataset& generated,
                        double gamma = 1.0, double sigma = 0.0);

}  // namespace causalrt

#endif  // CAUSALRT_METRICS_HPP
