#include "causalrt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "causalrt/preprocess.hpp"
#include "causalrt/rng.hpp"

namespace causalrt {
namespace {

std::vector<double> standardized(const std::vector<double>& v, const char* what) {
  const std::size_t n = v.size();
  if (n < 2) throw std::invalid_argument(std::string(what) + ": need at least two values");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) throw std::invalid_argument(std::string(what) + ": zero-variance input");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (v[i] - mean) / sd;
  return out;
}

double chebyshev(const double* a, const double* b, std::int64_t d) {
  double m = 0.0;
  for (std::int64_t i = 0; i < d; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void check_rows(const RealMatrix& a, const RealMatrix& b, const char* what) {
  if (a.rows != b.rows) throw std::invalid_argument(std::string(what) + ": row count mismatch");
}

// Gram matrix of the pooled sample, RBF kernel.
RealMatrix rbf_gram(const RealMatrix& pooled, double sigma) {
  const std::int64_t n = pooled.rows, d = pooled.cols;
  RealMatrix k(n, n);
  const double c = -0.5 / (sigma * sigma);
  for (std::int64_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::int64_t j = i + 1; j < n; ++j) {
      double sq = 0.0;
      for (std::int64_t t = 0; t < d; ++t) {
        const double diff = pooled(i, t) - pooled(j, t);
        sq += diff * diff;
      }
      const double val = std::exp(c * sq);
      k(i, j) = val;
      k(j, i) = val;
    }
  }
  return k;
}

double mmd2_from_gram(const RealMatrix& gram, const std::vector<std::int64_t>& idx,
                      std::int64_t n, std::int64_t m) {
  double kxx = 0.0, kyy = 0.0, kxy = 0.0;
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = i + 1; j < n; ++j) kxx += gram(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = i + 1; j < m; ++j)
      kyy += gram(idx[static_cast<std::size_t>(n + i)], idx[static_cast<std::size_t>(n + j)]);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < m; ++j)
      kxy += gram(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(n + j)]);
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return 2.0 * kxx / (nn * (nn - 1.0)) + 2.0 * kyy / (mm * (mm - 1.0)) - 2.0 * kxy / (nn * mm);
}

// Shared transformed layout for graph-aware metrics: continuous columns
// standardized with observed statistics, categoricals one-hot.
struct MetricLayout {
  std::map<std::string, ColumnStats> stats;
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> span;  // node -> [begin, width)
  std::int64_t width = 0;
};

MetricLayout metric_layout(const CausalGraph& g, const Dataset& observed) {
  MetricLayout ml;
  for (const auto& node : g.nodes) {
    const ColumnStats st = fit_column_stats(observed, node);
    const std::int64_t w = st.kind == ColumnKind::kContinuous ? 1 : st.num_classes;
    ml.stats[node] = st;
    ml.span[node] = {ml.width, w};
    ml.width += w;
  }
  return ml;
}

RealMatrix metric_table(const MetricLayout& ml, const CausalGraph& g, const Dataset& table) {
  const std::int64_t n = table.num_rows();
  RealMatrix out(n, ml.width);
  for (const auto& node : g.nodes) {
    const ColumnStats& st = ml.stats.at(node);
    const auto [begin, w] = ml.span.at(node);
    const std::int64_t c = table.col_index_checked(node);
    if (st.kind == ColumnKind::kContinuous) {
      for (std::int64_t r = 0; r < n; ++r)
        out(r, begin) = (table.values(r, c) - st.mean) / st.stddev;
    } else {
      for (std::int64_t r = 0; r < n; ++r) {
        const auto code = static_cast<std::int64_t>(std::llround(table.values(r, c)));
        if (code < 0 || code >= w)
          throw std::invalid_argument("metrics: class code outside observed range in '" + node + "'");
        out(r, begin + code) = 1.0;
      }
    }
  }
  return out;
}

RealMatrix take_columns(const RealMatrix& m, const std::vector<std::pair<std::int64_t, std::int64_t>>& spans) {
  std::int64_t w = 0;
  for (const auto& s : spans) w += s.second;
  RealMatrix out(m.rows, w);
  std::int64_t off = 0;
  for (const auto& [begin, width] : spans) {
    for (std::int64_t r = 0; r < m.rows; ++r)
      for (std::int64_t c = 0; c < width; ++c) out(r, off + c) = m(r, begin + c);
    off += width;
  }
  return out;
}

}  // namespace

double delta_u(const std::vector<double>& u_hat, const std::vector<double>& u) {
  if (u_hat.size() != u.size()) throw std::invalid_argument("delta_u: size mismatch");
  const std::vector<double> a = standardized(u_hat, "delta_u");
  const std::vector<double> b = standardized(u, "delta_u");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    num += d * d;
    den += b[i] * b[i];
  }
  return num / den;
}

double cic_score(double du, double dsre) {
  if (du < 0.0 || dsre < 0.0) throw std::invalid_argument("cic_score: negative component");
  return std::exp(-(du + dsre));
}

double digamma(double x) {
  if (x <= 0.0) throw std::invalid_argument("digamma: x must be positive");
  double r = 0.0;
  while (x < 6.0) {
    r -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  r += std::log(x) - 0.5 * inv;
  r -= inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
  return r;
}

double ksg_mi(const RealMatrix& x, const RealMatrix& y, int k) {
  check_rows(x, y, "ksg_mi");
  const std::int64_t n = x.rows;
  if (k < 1 || k >= n) throw std::invalid_argument("ksg_mi: need 1 <= k < n");
  std::vector<double> dx(static_cast<std::size_t>(n)), dy(static_cast<std::size_t>(n)),
      dj(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      dx[static_cast<std::size_t>(j)] = chebyshev(x.row_ptr(i), x.row_ptr(j), x.cols);
      dy[static_cast<std::size_t>(j)] = chebyshev(y.row_ptr(i), y.row_ptr(j), y.cols);
      dj[static_cast<std::size_t>(j)] = std::max(dx[static_cast<std::size_t>(j)], dy[static_cast<std::size_t>(j)]);
    }
    std::vector<double> order = dj;
    order[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
    std::nth_element(order.begin(), order.begin() + (k - 1), order.end());
    const double eps = order[static_cast<std::size_t>(k - 1)];
    std::int64_t nx = 0, ny = 0;
    for (std::int64_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (dx[static_cast<std::size_t>(j)] < eps) ++nx;
      if (dy[static_cast<std::size_t>(j)] < eps) ++ny;
    }
    acc += digamma(static_cast<double>(nx + 1)) + digamma(static_cast<double>(ny + 1));
  }
  return digamma(k) + digamma(static_cast<double>(n)) - acc / static_cast<double>(n);
}

double ksg_cmi(const RealMatrix& x, const RealMatrix& y, const RealMatrix& z, int k) {
  if (z.cols == 0) return ksg_mi(x, y, k);
  check_rows(x, y, "ksg_cmi");
  check_rows(x, z, "ksg_cmi");
  const std::int64_t n = x.rows;
  if (k < 1 || k >= n) throw std::invalid_argument("ksg_cmi: need 1 <= k < n");
  std::vector<double> dxz(static_cast<std::size_t>(n)), dyz(static_cast<std::size_t>(n)),
      dz(static_cast<std::size_t>(n)), dj(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      const double ddx = chebyshev(x.row_ptr(i), x.row_ptr(j), x.cols);
      const double ddy = chebyshev(y.row_ptr(i), y.row_ptr(j), y.cols);
      const double ddz = chebyshev(z.row_ptr(i), z.row_ptr(j), z.cols);
      dz[static_cast<std::size_t>(j)] = ddz;
      dxz[static_cast<std::size_t>(j)] = std::max(ddx, ddz);
      dyz[static_cast<std::size_t>(j)] = std::max(ddy, ddz);
      dj[static_cast<std::size_t>(j)] = std::max(dxz[static_cast<std::size_t>(j)], ddy);
    }
    std::vector<double> order = dj;
    order[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
    std::nth_element(order.begin(), order.begin() + (k - 1), order.end());
    const double eps = order[static_cast<std::size_t>(k - 1)];
    std::int64_t nxz = 0, nyz = 0, nz = 0;
    for (std::int64_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (dxz[static_cast<std::size_t>(j)] < eps) ++nxz;
      if (dyz[static_cast<std::size_t>(j)] < eps) ++nyz;
      if (dz[static_cast<std::size_t>(j)] < eps) ++nz;
    }
    acc += digamma(static_cast<double>(nxz + 1)) + digamma(static_cast<double>(nyz + 1)) -
           digamma(static_cast<double>(nz + 1));
  }
  return digamma(k) - acc / static_cast<double>(n);
}

double median_heuristic(const RealMatrix& pooled) {
  const std::int64_t n = pooled.rows;
  if (n < 2) throw std::invalid_argument("median_heuristic: need at least two rows");
  const std::int64_t stride = (n + 2047) / 2048;
  std::vector<std::int64_t> rows;
  for (std::int64_t r = 0; r < n; r += stride) rows.push_back(r);
  std::vector<double> dist;
  dist.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      double sq = 0.0;
      for (std::int64_t c = 0; c < pooled.cols; ++c) {
        const double d = pooled(rows[i], c) - pooled(rows[j], c);
        sq += d * d;
      }
      dist.push_back(std::sqrt(sq));
    }
  }
  const std::size_t mid = (dist.size() - 1) / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  return dist[mid];
}

double mmd2_unbiased(const RealMatrix& x, const RealMatrix& y, double sigma) {
  if (x.cols != y.cols) throw std::invalid_argument("mmd2_unbiased: dimension mismatch");
  if (x.rows < 2 || y.rows < 2) throw std::invalid_argument("mmd2_unbiased: need two rows per side");
  if (sigma <= 0.0) throw std::invalid_argument("mmd2_unbiased: sigma must be positive");
  const double c = -0.5 / (sigma * sigma);
  auto ksum = [&](const RealMatrix& a, const RealMatrix& b, bool offdiag) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < a.rows; ++i) {
      const std::int64_t j0 = offdiag ? i + 1 : 0;
      for (std::int64_t j = j0; j < b.rows; ++j) {
        double sq = 0.0;
        for (std::int64_t t = 0; t < a.cols; ++t) {
          const double d = a(i, t) - b(j, t);
          sq += d * d;
        }
        acc += std::exp(c * sq);
      }
    }
    return acc;
  };
  const double n = static_cast<double>(x.rows), m = static_cast<double>(y.rows);
  return 2.0 * ksum(x, x, true) / (n * (n - 1.0)) + 2.0 * ksum(y, y, true) / (m * (m - 1.0)) -
         2.0 * ksum(x, y, false) / (n * m);
}

MmdTestResult mmd_permutation_test(const RealMatrix& x, const RealMatrix& y, double sigma,
                                   int permutations, std::uint64_t seed) {
  if (x.cols != y.cols) throw std::invalid_argument("mmd_permutation_test: dimension mismatch");
  if (permutations < 1) throw std::invalid_argument("mmd_permutation_test: need permutations >= 1");
  const std::int64_t n = x.rows, m = y.rows;
  RealMatrix pooled(n + m, x.cols);
  for (std::int64_t r = 0; r < n; ++r)
    for (std::int64_t c = 0; c < x.cols; ++c) pooled(r, c) = x(r, c);
  for (std::int64_t r = 0; r < m; ++r)
    for (std::int64_t c = 0; c < x.cols; ++c) pooled(n + r, c) = y(r, c);
  const RealMatrix gram = rbf_gram(pooled, sigma);

  std::vector<std::int64_t> idx(static_cast<std::size_t>(n + m));
  for (std::int64_t i = 0; i < n + m; ++i) idx[static_cast<std::size_t>(i)] = i;
  MmdTestResult res;
  res.mmd2 = mmd2_from_gram(gram, idx, n, m);

  Rng rng(seed);
  int exceed = 0;
  for (int p = 0; p < permutations; ++p) {
    rng.shuffle(idx);
    if (mmd2_from_gram(gram, idx, n, m) >= res.mmd2) ++exceed;
  }
  res.p_value = (1.0 + exceed) / (1.0 + permutations);
  return res;
}

double kmd_score(const RealMatrix& observed, const RealMatrix& generated, double gamma,
                 double sigma) {
  if (observed.cols != generated.cols) throw std::invalid_argument("kmd_score: dimension mismatch");
  if (gamma <= 0.0) throw std::invalid_argument("kmd_score: gamma must be positive");
  const std::int64_t d = observed.cols;
  // Column scale from the observed block; constant columns are centered only.
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0), scale(static_cast<std::size_t>(d), 1.0);
  for (std::int64_t c = 0; c < d; ++c) {
    double mu = 0.0;
    for (std::int64_t r = 0; r < observed.rows; ++r) mu += observed(r, c);
    mu /= static_cast<double>(observed.rows);
    double ss = 0.0;
    for (std::int64_t r = 0; r < observed.rows; ++r) {
      const double dd = observed(r, c) - mu;
      ss += dd * dd;
    }
    const double sd = std::sqrt(ss / static_cast<double>(observed.rows - 1));
    mean[static_cast<std::size_t>(c)] = mu;
    scale[static_cast<std::size_t>(c)] = sd > 0.0 ? sd : 1.0;
  }
  auto standardize = [&](const RealMatrix& src) {
    RealMatrix out(src.rows, d);
    for (std::int64_t r = 0; r < src.rows; ++r)
      for (std::int64_t c = 0; c < d; ++c)
        out(r, c) = (src(r, c) - mean[static_cast<std::size_t>(c)]) / scale[static_cast<std::size_t>(c)];
    return out;
  };
  const RealMatrix obs = standardize(observed);
  const RealMatrix gen = standardize(generated);

  double s = sigma;
  if (s <= 0.0) {
    RealMatrix pooled(obs.rows + gen.rows, d);
    for (std::int64_t r = 0; r < obs.rows; ++r)
      for (std::int64_t c = 0; c < d; ++c) pooled(r, c) = obs(r, c);
    for (std::int64_t r = 0; r < gen.rows; ++r)
      for (std::int64_t c = 0; c < d; ++c) pooled(obs.rows + r, c) = gen(r, c);
    s = median_heuristic(pooled);
    if (s <= 0.0) s = 1.0;  // all pooled rows identical
  }
  return std::exp(-gamma * std::max(0.0, mmd2_unbiased(obs, gen, s)));
}

double prior_matching_diagnostic(const std::vector<double>& latent) {
  if (latent.empty()) throw std::invalid_argument("prior_matching_diagnostic: empty latent");
  double acc = 0.0;
  for (double u : latent) acc += u * u;
  return acc / static_cast<double>(latent.size());
}

double cmi_edge_score(double i_obs, double i_cf) {
  const double a = std::max(0.0, i_obs);
  const double b = std::max(0.0, i_cf);
  const double raw = 1.0 - std::abs(a - b) / (a + 1e-6);
  return std::min(1.0, std::max(0.0, raw));
}

CmiScoreReport cmi_score(const CausalGraph& g, const Dataset& observed, const Dataset& generated,
                         int k) {
  const MetricLayout ml = metric_layout(g, observed);
  const RealMatrix obs = metric_table(ml, g, observed);
  const RealMatrix gen = metric_table(ml, g, generated);

  CmiScoreReport rep;
  std::int64_t scored_nodes = 0;
  for (const auto& node : g.nodes) {
    const auto& parents = g.parents_of(node);
    if (parents.empty()) continue;
    double node_acc = 0.0;
    for (const auto& p : parents) {
      std::vector<std::pair<std::int64_t, std::int64_t>> zspans;
      for (const auto& q : parents)
        if (q != p) zspans.push_back(ml.span.at(q));
      const RealMatrix x_obs = take_columns(obs, {ml.span.at(p)});
      const RealMatrix y_obs = take_columns(obs, {ml.span.at(node)});
      const RealMatrix z_obs = take_columns(obs, zspans);
      const RealMatrix x_gen = take_columns(gen, {ml.span.at(p)});
      const RealMatrix y_gen = take_columns(gen, {ml.span.at(node)});
      const RealMatrix z_gen = take_columns(gen, zspans);
      CmiEdge edge;
      edge.parent = p;
      edge.child = node;
      edge.i_obs = ksg_cmi(x_obs, y_obs, z_obs, k);
      edge.i_cf = ksg_cmi(x_gen, y_gen, z_gen, k);
      edge.score = cmi_edge_score(edge.i_obs, edge.i_cf);
      node_acc += edge.score;
      rep.edges.push_back(edge);
    }
    rep.per_node[node] = node_acc / static_cast<double>(parents.size());
    rep.aggregate += rep.per_node[node];
    ++scored_nodes;
  }
  if (scored_nodes == 0) throw std::invalid_argument("cmi_score: graph has no edges");
  rep.aggregate /= static_cast<double>(scored_nodes);
  return rep;
}

KmdReport kmd_score_scm(const CausalGraph& g, const Dataset& observed, const Dataset& generated,
                        double gamma, double sigma) {
  const MetricLayout ml = metric_layout(g, observed);
  const RealMatrix obs = metric_table(ml, g, observed);
  const RealMatrix gen = metric_table(ml, g, generated);

  KmdReport rep;
  std::int64_t scored = 0;
  for (const auto& node : g.nodes) {
    const auto& parents = g.parents_of(node);
    if (parents.empty()) continue;
    std::vector<std::pair<std::int64_t, std::int64_t>> spans = {ml.span.at(node)};
    for (const auto& p : parents) spans.push_back(ml.span.at(p));
    const double score =
        kmd_score(take_columns(obs, spans), take_columns(gen, spans), gamma, sigma);
    rep.per_node[node] = score;
    rep.aggregate += score;
    ++scored;
  }
  if (scored == 0) throw std::invalid_argument("kmd_score_scm: graph has no edges");
  rep.aggregate /= static_cast<double>(scored);
  return rep;
}

}  // namespace causalrt
