#pragma once

// Shrinkage correlation / partial correlation estimation and the
// thresholded neighbourhood graphs built from them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nbvs/errors.hpp"
#include "nbvs/model.hpp"
#include "nbvs/rng.hpp"

namespace nbvs {

struct ShrinkageEstimate {
  Matrix r_hat;           // shrunken correlation, unit diagonal
  double lambda_star = 0; // shrinkage intensity in [0, 1]
  Vector variances;       // unbiased column variances of the input
};

/// Correlation shrinkage toward the identity with the analytic intensity
///   lambda* = sum_{i!=k} Var^(r_ik) / sum_{i!=k} r_ik^2,
/// where Var^(r_ik) = n / (n-1)^3 * sum_j (w_jik - wbar_ik)^2 and w_jik is the
/// product of the standardized values of variables i and k at sample j.
inline ShrinkageEstimate shrinkage_correlation(const Matrix& x) {
  const auto n = static_cast<double>(x.rows());
  if (x.rows() < 3) throw ConfigError("shrinkage estimation needs n >= 3");
  Matrix xs = standardize(x);

  ShrinkageEstimate est;
  est.variances.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Vector c = x.col(j).array() - x.col(j).mean();
    est.variances[j] = c.squaredNorm() / (n - 1.0);
  }

  Matrix r = xs.transpose() * xs / (n - 1.0);
  Matrix sq = xs.array().square().matrix();
  Matrix sum_w2 = sq.transpose() * sq;
  Matrix wbar = r * ((n - 1.0) / n);
  Matrix var_r = (sum_w2.array() - n * wbar.array().square()).matrix() *
                 (n / std::pow(n - 1.0, 3));

  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    for (Eigen::Index k = 0; k < r.cols(); ++k) {
      if (i == k) continue;
      num += var_r(i, k);
      den += r(i, k) * r(i, k);
    }
  double lambda = den > 0.0 ? num / den : 1.0;
  est.lambda_star = std::clamp(lambda, 0.0, 1.0);

  est.r_hat = (1.0 - est.lambda_star) * r;
  est.r_hat.diagonal().setOnes();
  return est;
}

/// rho_ik = -s^ik / sqrt(s^ii s^kk) from the inverse of the shrunken
/// correlation matrix; unit diagonal by convention.
inline Matrix partial_correlation(const ShrinkageEstimate& est) {
  Eigen::LLT<Matrix> llt(est.r_hat);
  if (llt.info() != Eigen::Success)
    throw NumericalError(
        "correlation estimate is not positive definite; use nonzero shrinkage");
  const auto p = est.r_hat.rows();
  Matrix inv = llt.solve(Matrix::Identity(p, p));
  Matrix rho(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index k = 0; k < p; ++k)
      rho(i, k) = i == k ? 1.0 : -inv(i, k) / std::sqrt(inv(i, i) * inv(k, k));
  return rho;
}

enum class GraphSource { partial_correlation, correlation, random };

inline std::string to_string(GraphSource s) {
  switch (s) {
    case GraphSource::partial_correlation: return "pcor";
    case GraphSource::correlation: return "corr";
    case GraphSource::random: return "random";
  }
  return "?";
}

inline GraphSource parse_graph_source(const std::string& s) {
  if (s == "pcor" || s == "partial_correlation") return GraphSource::partial_correlation;
  if (s == "corr" || s == "correlation") return GraphSource::correlation;
  if (s == "random") return GraphSource::random;
  throw ConfigError("unknown graph source '" + s + "'");
}

struct Edge {
  std::size_t i = 0;
  std::size_t k = 0;
  double weight = 0.0;
};

/// Symmetric, loop-free adjacency over variables.
class NeighbourhoodGraph {
 public:
  NeighbourhoodGraph() = default;
  NeighbourhoodGraph(std::size_t p, GraphSource source, double percentile)
      : adjacency_(p), source_(source), percentile_(percentile) {}

  static NeighbourhoodGraph complete(std::size_t p) {
    NeighbourhoodGraph g(p, GraphSource::partial_correlation, 0.0);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t k = i + 1; k < p; ++k) g.add_edge(i, k, 1.0);
    return g;
  }

  static NeighbourhoodGraph from_edges(std::size_t p, const std::vector<Edge>& edges,
                                       GraphSource source = GraphSource::partial_correlation,
                                       double percentile = 0.0) {
    NeighbourhoodGraph g(p, source, percentile);
    for (const auto& e : edges) g.add_edge(e.i, e.k, e.weight);
    return g;
  }

  /// Inserts (i, k) keeping neighbour lists sorted; duplicates are ignored.
  void add_edge(std::size_t i, std::size_t k, double weight) {
    if (i >= adjacency_.size() || k >= adjacency_.size())
      throw ConfigError("edge (" + std::to_string(i) + "," + std::to_string(k) +
                        ") outside the variable range");
    if (i == k) throw ConfigError("self-loop in edge list");
    if (i > k) std::swap(i, k);
    if (has_edge(i, k)) return;
    auto insert = [](IndexList& v, std::size_t x) {
      v.insert(std::lower_bound(v.begin(), v.end(), x), x);
    };
    insert(adjacency_[i], k);
    insert(adjacency_[k], i);
    edges_.push_back({i, k, weight});
  }

  std::size_t size() const { return adjacency_.size(); }
  const IndexList& neighbours(std::size_t i) const { return adjacency_[i]; }

  bool has_edge(std::size_t i, std::size_t k) const {
    const auto& nb = adjacency_[i];
    return std::binary_search(nb.begin(), nb.end(), k);
  }

  /// {k} ∪ nb(k), ascending.
  IndexList neighbourhood(std::size_t k) const {
    IndexList out = adjacency_[k];
    out.insert(std::lower_bound(out.begin(), out.end(), k), k);
    return out;
  }

  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  double mean_degree() const {
    if (adjacency_.empty()) return 0.0;
    return 2.0 * static_cast<double>(edges_.size()) /
           static_cast<double>(adjacency_.size());
  }

  GraphSource source() const { return source_; }
  double threshold_percentile() const { return percentile_; }

 private:
  std::vector<IndexList> adjacency_;
  std::vector<Edge> edges_;
  GraphSource source_ = GraphSource::partial_correlation;
  double percentile_ = 0.0;
};

/// Percentile with linear interpolation between order statistics.
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

/// Keep pair (i, k) when |coef_ik| >= the C-th percentile of all upper-triangle
/// absolute coefficients.
inline NeighbourhoodGraph threshold_graph(const Matrix& coef, double c,
                                          GraphSource source = GraphSource::partial_correlation) {
  if (!(c >= 0.0 && c < 1.0)) throw ConfigError("threshold percentile must lie in [0,1)");
  const auto p = static_cast<std::size_t>(coef.rows());
  std::vector<double> mags;
  mags.reserve(p * (p - 1) / 2);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = i + 1; k < p; ++k)
      mags.push_back(std::abs(coef(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))));
  const double cut = percentile(mags, c);
  NeighbourhoodGraph g(p, source, c);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = i + 1; k < p; ++k) {
      const double m = std::abs(coef(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
      if (m >= cut) g.add_edge(i, k, m);
    }
  return g;
}

/// Erdos-Renyi graph with edge probability mean_degree / (p - 1).
inline NeighbourhoodGraph random_graph(std::size_t p, double mean_degree,
                                       RngStream& rng) {
  if (p < 1) throw ConfigError("random graph needs p >= 1");
  const double top = static_cast<double>(p) - 1.0;
  if (!(mean_degree >= 0.0 && mean_degree <= top))
    throw ConfigError("mean degree must lie in [0, p-1]");
  const double prob = p > 1 ? mean_degree / top : 0.0;
  NeighbourhoodGraph g(p, GraphSource::random, 0.0);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = i + 1; k < p; ++k)
      if (rng.uniform() < prob) g.add_edge(i, k, 1.0);
  return g;
}

/// Graph from a standardized design: shrinkage (partial) correlations
/// thresholded at percentile C.
inline NeighbourhoodGraph estimate_graph(const Matrix& x, GraphSource source,
                                         double c) {
  auto est = shrinkage_correlation(x);
  if (source == GraphSource::correlation) return threshold_graph(est.r_hat, c, source);
  if (source == GraphSource::partial_correlation)
    return threshold_graph(partial_correlation(est), c, source);
  throw ConfigError("estimate_graph: random graphs need an rng; use random_graph");
}

}  // namespace nbvs
