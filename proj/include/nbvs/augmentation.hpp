#pragma once

// Latent layer of the auxiliary-variable binary regression:
// truncated logistic / normal utilities z, the Kolmogorov-Smirnov mixing
// variances lambda, and the conjugate draw of beta.

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "nbvs/errors.hpp"
#include "nbvs/model.hpp"
#include "nbvs/rng.hpp"

namespace nbvs {

namespace detail {

/// log(1 + exp(x)).
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// Draw from Logistic(location, scale) restricted to (0, inf) when
/// `positive`, else to (-inf, 0]. Inverse CDF evaluated in log space so the
/// truncation mass may be arbitrarily small.
inline double truncated_logistic(double location, double scale, bool positive,
                                 RngStream& rng) {
  const double v = rng.uniform();
  const double t = location / scale;
  double z;
  if (positive) {
    // upper-tail mass S0 = 1 / (1 + exp(-t)); q = v * S0 is the survival level
    const double log_q = std::log(v) - softplus(-t);
    const double q = std::exp(log_q);
    z = location + scale * (std::log1p(-q) - log_q);
    if (!(z > 0.0)) z = std::numeric_limits<double>::denorm_min();
  } else {
    const double log_u = std::log(v) - softplus(t);
    const double u = std::exp(log_u);
    z = location + scale * (log_u - std::log1p(-u));
    if (z > 0.0) z = 0.0;
  }
  return z;
}

inline double normal_cdf(double x) {
  return 0.5 * boost::math::erfc(-x / std::numbers::sqrt2);
}
inline double normal_quantile(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

/// Standard normal restricted to (a, inf).
inline double normal_upper_tail(double a, RngStream& rng) {
  if (a <= 0.0) {
    const double lower = normal_cdf(a);
    const double u = lower + rng.uniform() * (1.0 - lower);
    return std::max(normal_quantile(u), std::nextafter(a, INFINITY));
  }
  // complementary form: survival level q = v * Phi(-a)
  const double tail = normal_cdf(-a);
  if (tail > 1e-300) {
    const double q = rng.uniform() * tail;
    return std::max(-normal_quantile(q), std::nextafter(a, INFINITY));
  }
  // beyond double range of Phi: Rayleigh-proposal rejection
  for (;;) {
    const double cand = std::sqrt(a * a - 2.0 * std::log(rng.uniform()));
    if (rng.uniform() * cand <= a) return cand;
  }
}

/// Draw from N(location, scale^2) restricted to (0, inf) / (-inf, 0].
inline double truncated_normal(double location, double scale, bool positive,
                               RngStream& rng) {
  const double a = -location / scale;
  if (positive) {
    double z = location + scale * normal_upper_tail(a, rng);
    return z > 0.0 ? z : std::numeric_limits<double>::denorm_min();
  }
  // Z < a  <=>  -Z > -a
  double z = location - scale * normal_upper_tail(-a, rng);
  return z > 0.0 ? 0.0 : z;
}

// Alternating-series representations of exp(lambda/2) * p(lambda), the
// acceptance probability of a GIG(0.5, 1, r^2) candidate.

/// Series in X = exp(-lambda/2): 1 - 4 X^3 + 9 X^8 - 16 X^15 + ...
/// Valid squeeze for lambda > 4/3.
inline std::optional<bool> accept_right(double u, double lambda,
                                        int max_alternations) {
  double z = 1.0;
  const double x = std::exp(-0.5 * lambda);
  int j = 0;
  for (int a = 0; a < max_alternations; ++a) {
    ++j;
    double k = static_cast<double>(j + 1);
    z -= k * k * std::pow(x, k * k - 1.0);
    if (z > u) return true;
    ++j;
    k = static_cast<double>(j + 1);
    z += k * k * std::pow(x, k * k - 1.0);
    if (z < u) return false;
  }
  return std::nullopt;
}

/// Jacobi-transformed series for small lambda (<= 4/3).
inline std::optional<bool> accept_left(double u, double lambda,
                                       int max_alternations) {
  constexpr double pi = std::numbers::pi;
  const double h = 0.5 * std::log(2.0) + 2.5 * std::log(pi) -
                   2.5 * std::log(lambda) - pi * pi / (2.0 * lambda) +
                   0.5 * lambda;
  const double log_u = std::log(u);
  double z = 1.0;
  const double x = std::exp(-pi * pi / (2.0 * lambda));
  const double k = lambda / (pi * pi);
  int j = 0;
  for (int a = 0; a < max_alternations; ++a) {
    ++j;
    const double jj = static_cast<double>(j);
    z -= k * std::pow(x, jj * jj - 1.0);
    if (h + std::log(z) > log_u) return true;
    ++j;
    const double j1 = static_cast<double>(j + 1);
    z += j1 * j1 * std::pow(x, j1 * j1 - 1.0);
    if (h + std::log(z) < log_u) return false;
  }
  return std::nullopt;
}

/// GIG(0.5, 1, r^2) as r / W with W ~ InverseGaussian(1, r), W by the
/// transformation-with-uniform-choice method.
inline double gig_half(double r, RngStream& rng) {
  double y = rng.normal();
  y *= y;
  y = 1.0 + (y - std::sqrt(y * (4.0 * r + y))) / (2.0 * r);
  return rng.uniform() <= 1.0 / (1.0 + y) ? r / y : r * y;
}

inline constexpr double kResidualFloor = 1e-8;
inline constexpr long kMaxCandidates = 1'000'000;
inline constexpr int kMaxAlternations = 1000;

}  // namespace detail

/// One exact draw of lambda from
///   p(lambda | r^2) ∝ N(r; 0, T lambda) (4 sqrt(lambda))^-1 KS(sqrt(lambda)/2).
/// The tempered target equals the untempered one at residual r^2 / T.
inline double sample_lambda_one(double r2, RngStream& rng,
                                double temperature = 1.0) {
  const double r =
      std::max(std::sqrt(std::max(r2, 0.0) / temperature), detail::kResidualFloor);
  for (long c = 0; c < detail::kMaxCandidates; ++c) {
    const double lambda = detail::gig_half(r, rng);
    const double u = rng.uniform();
    if (!(lambda > 0.0) || !std::isfinite(lambda)) continue;
    auto ok = lambda > 4.0 / 3.0
                  ? detail::accept_right(u, lambda, detail::kMaxAlternations)
                  : detail::accept_left(u, lambda, detail::kMaxAlternations);
    if (ok && *ok) return lambda;
  }
  throw RejectionLimitError(r2);
}

inline Vector sample_lambda(const Vector& residuals_squared, RngStream& rng,
                            double temperature = 1.0) {
  Vector out(residuals_squared.size());
  for (Eigen::Index j = 0; j < out.size(); ++j)
    out[j] = sample_lambda_one(residuals_squared[j], rng, temperature);
  return out;
}

/// Refresh z given (beta, gamma) with lambda integrated out: truncated
/// Logistic(eta_j, sqrt T) for the logistic link, truncated N(eta_j, T) for
/// probit.
inline void sample_z(ModelState& state, const Dataset& data, Link link,
                     RngStream& rng) {
  const Vector eta = linear_predictor(data, state.included(), state.beta_gamma);
  const double scale = std::sqrt(state.temperature);
  state.z.resize(eta.size());
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    const bool positive = data.y[static_cast<std::size_t>(j)] != 0;
    state.z[j] = link == Link::logistic
                     ? detail::truncated_logistic(eta[j], scale, positive, rng)
                     : detail::truncated_normal(eta[j], scale, positive, rng);
  }
}

/// Refresh lambda given z. Probit keeps lambda at one.
inline void sample_lambda(ModelState& state, const Dataset& data, Link link,
                          RngStream& rng) {
  if (link == Link::probit) {
    state.lambda = Vector::Ones(static_cast<Eigen::Index>(data.n()));
    return;
  }
  const Vector eta = linear_predictor(data, state.included(), state.beta_gamma);
  state.lambda = sample_lambda((state.z - eta).array().square().matrix(), rng,
                               state.temperature);
}

/// B + L eps with L the lower factor of V.
inline Vector sample_beta(const PosteriorGaussian& posterior, RngStream& rng) {
  if (posterior.included.empty()) return Vector{};
  Vector eps(posterior.mean.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = rng.normal();
  return posterior.mean + posterior.v_chol.triangularView<Eigen::Lower>() * eps;
}

}  // namespace nbvs
