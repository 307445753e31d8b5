#pragma once

// Simulation designs with known truth: five leading predictors, coefficient 2.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nbvs/errors.hpp"
#include "nbvs/model.hpp"
#include "nbvs/rng.hpp"

namespace nbvs {

inline constexpr std::size_t kTruePredictors = 5;
inline constexpr double kTrueCoefficient = 2.0;

enum class Scenario { blocks, expression_backed };

struct SimTruth {
  IndexList true_indices;
  std::vector<double> beta_true;
  Scenario scenario = Scenario::blocks;
};

struct Simulation {
  Dataset data;
  SimTruth truth;
};

namespace detail {

inline SimTruth make_truth(std::size_t p, Scenario scenario) {
  if (p < kTruePredictors)
    throw ConfigError("simulation needs p >= " + std::to_string(kTruePredictors));
  SimTruth t;
  t.scenario = scenario;
  t.beta_true.assign(p, 0.0);
  for (std::size_t i = 0; i < kTruePredictors; ++i) {
    t.true_indices.push_back(i);
    t.beta_true[i] = kTrueCoefficient;
  }
  return t;
}

/// y_j ~ Bernoulli(logistic(sum_{i in truth} beta_i x_ji)).
inline std::vector<std::uint8_t> draw_response(const Matrix& x, const SimTruth& t,
                                               RngStream& rng) {
  std::vector<std::uint8_t> y(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    double eta = 0.0;
    for (auto i : t.true_indices)
      eta += t.beta_true[i] * x(j, static_cast<Eigen::Index>(i));
    y[static_cast<std::size_t>(j)] = rng.uniform() < 1.0 / (1.0 + std::exp(-eta));
  }
  return y;
}

inline std::vector<std::string> default_labels(std::size_t p) {
  std::vector<std::string> out(p);
  for (std::size_t i = 0; i < p; ++i) out[i] = "x" + std::to_string(i);
  return out;
}

}  // namespace detail

/// Block design: x_{j, mq+i} = x*_{j,i} + w_{j,m}, x* and w iid N(0,1).
/// Covariates are returned unstandardized.
inline Simulation simulate_scenario1(std::size_t n, std::size_t p, std::size_t q,
                                     RngStream& rng) {
  if (n < 2) throw ConfigError("scenario 1 needs n >= 2");
  if (q == 0 || p % q != 0)
    throw ConfigError("scenario 1: p = " + std::to_string(p) +
                      " is not a multiple of the block size q = " + std::to_string(q));
  const std::size_t blocks = p / q;
  Simulation s;
  s.truth = detail::make_truth(p, Scenario::blocks);
  s.data.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  std::vector<double> base(q), shift(blocks);
  for (std::size_t j = 0; j < n; ++j) {
    for (auto& v : base) v = rng.normal();
    for (auto& v : shift) v = rng.normal();
    for (std::size_t m = 0; m < blocks; ++m)
      for (std::size_t i = 0; i < q; ++i)
        s.data.x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m * q + i)) =
            base[i] + shift[m];
  }
  s.data.y = detail::draw_response(s.data.x, s.truth, rng);
  s.data.column_labels = detail::default_labels(p);
  return s;
}

/// p columns drawn without replacement (in draw order) from `expression`,
/// standardized; the first five drawn columns carry the signal.
inline Simulation simulate_scenario2(const Matrix& expression, std::size_t p,
                                     RngStream& rng,
                                     const std::vector<std::string>& labels = {}) {
  const auto P = static_cast<std::size_t>(expression.cols());
  if (expression.rows() < 2) throw ConfigError("scenario 2 needs n >= 2");
  if (P < p)
    throw ConfigError("scenario 2: matrix has " + std::to_string(P) +
                      " columns, fewer than p = " + std::to_string(p));
  std::vector<std::size_t> pool(P);
  for (std::size_t i = 0; i < P; ++i) pool[i] = i;
  for (std::size_t i = 0; i < p; ++i) std::swap(pool[i], pool[i + rng.pick(P - i)]);

  Simulation s;
  s.truth = detail::make_truth(p, Scenario::expression_backed);
  Matrix sub(expression.rows(), static_cast<Eigen::Index>(p));
  s.data.column_labels.resize(p);
  for (std::size_t k = 0; k < p; ++k) {
    sub.col(static_cast<Eigen::Index>(k)) = expression.col(static_cast<Eigen::Index>(pool[k]));
    s.data.column_labels[k] =
        labels.size() == P ? labels[pool[k]] : "col" + std::to_string(pool[k]);
  }
  s.data.x = standardize(sub);
  s.data.y = detail::draw_response(s.data.x, s.truth, rng);
  return s;
}

/// Synthetic stand-in for an expression matrix: each column loads on one of
/// `factors` latent Gaussian factors with a signed loading of magnitude in
/// [min_loading, max_loading], plus independent noise, then is shifted and
/// scaled like log intensities. Same-factor correlations range over roughly
/// +-max_loading^2.
struct SurrogateSpec {
  std::size_t n = 104;
  std::size_t columns = 1000;
  std::size_t factors = 40;
  double min_loading = 0.3;
  double max_loading = 0.95;
  double negative_fraction = 0.2;
};

inline Matrix expression_surrogate(const SurrogateSpec& spec, RngStream& rng) {
  if (spec.n < 2 || spec.columns < 1 || spec.factors < 1)
    throw ConfigError("surrogate needs n >= 2, columns >= 1, factors >= 1");
  if (!(0.0 <= spec.min_loading && spec.min_loading <= spec.max_loading &&
        spec.max_loading < 1.0))
    throw ConfigError("surrogate loadings must satisfy 0 <= min <= max < 1");
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto P = static_cast<Eigen::Index>(spec.columns);
  Matrix f(n, static_cast<Eigen::Index>(spec.factors));
  for (Eigen::Index j = 0; j < f.rows(); ++j)
    for (Eigen::Index c = 0; c < f.cols(); ++c) f(j, c) = rng.normal();
  Matrix out(n, P);
  for (Eigen::Index c = 0; c < P; ++c) {
    const auto factor = static_cast<Eigen::Index>(rng.pick(spec.factors));
    double load = spec.min_loading + (spec.max_loading - spec.min_loading) * rng.uniform();
    if (rng.uniform() < spec.negative_fraction) load = -load;
    const double noise = std::sqrt(1.0 - load * load);
    const double level = 6.0 + 4.0 * rng.uniform();
    const double spread = 0.2 + 0.8 * rng.uniform();
    for (Eigen::Index j = 0; j < n; ++j)
      out(j, c) = level + spread * (load * f(j, factor) + noise * rng.normal());
  }
  return out;
}

}  // namespace nbvs
