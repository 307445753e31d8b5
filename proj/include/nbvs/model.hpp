#pragma once

// Data, priors, chain state and the conjugate Gaussian algebra shared by
// every sampling kernel.
//
// All marginal-likelihood work is routed through p_gamma x p_gamma
// factorizations of the posterior precision
//     P = x_S' (T lambda)^-1 x_S + v_S^-1,
// never through the n x n marginal covariance of z.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nbvs/errors.hpp"

namespace nbvs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexList = std::vector<std::size_t>;

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

struct Dataset {
  Matrix x;                       // n x p
  std::vector<std::uint8_t> y;    // 0/1, length n
  std::vector<std::string> column_labels;

  std::size_t n() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(x.cols()); }

  void validate() const {
    if (x.rows() < 2) throw ConfigError("dataset needs at least 2 samples");
    if (x.cols() < 1) throw ConfigError("dataset needs at least 1 covariate");
    if (y.size() != n())
      throw ConfigError("response length does not match covariate rows");
    for (auto v : y)
      if (v > 1) throw ConfigError("response entries must be 0 or 1");
    if (!column_labels.empty() && column_labels.size() != p())
      throw ConfigError("column label count does not match covariates");
    if (!x.allFinite()) throw ConfigError("covariates must be finite");
  }
};

enum class Link { logistic, probit };
enum class PriorForm { independence, g_prior };

struct PriorSpec {
  std::vector<double> pi;
  double c2 = 5.0;
  Link link = Link::logistic;
  PriorForm form = PriorForm::independence;

  static PriorSpec constant(std::size_t p, double pi, double c2,
                            Link link = Link::logistic,
                            PriorForm form = PriorForm::independence) {
    return PriorSpec{std::vector<double>(p, pi), c2, link, form};
  }

  void validate(std::size_t p) const {
    if (pi.size() != p)
      throw ConfigError("prior inclusion vector has length " +
                        std::to_string(pi.size()) + ", expected " +
                        std::to_string(p));
    for (double v : pi)
      if (!(v > 0.0 && v < 1.0))
        throw ConfigError("prior inclusion probabilities must lie in (0,1)");
    if (!(c2 > 0.0)) throw ConfigError("c2 must be positive");
  }

  /// log pi_i for gamma_i = 1, log(1 - pi_i) for gamma_i = 0.
  double log_prior(std::size_t i, bool included) const {
    return included ? std::log(pi[i]) : std::log1p(-pi[i]);
  }
};

/// State of one chain. `beta_gamma` is aligned with `included()`.
struct ModelState {
  std::vector<std::uint8_t> gamma;
  Vector beta_gamma;
  Vector z;
  Vector lambda;
  double temperature = 1.0;

  IndexList included() const {
    IndexList out;
    for (std::size_t i = 0; i < gamma.size(); ++i)
      if (gamma[i]) out.push_back(i);
    return out;
  }

  std::size_t model_size() const {
    return static_cast<std::size_t>(
        std::count(gamma.begin(), gamma.end(), std::uint8_t{1}));
  }

  Vector beta_full() const {
    Vector full = Vector::Zero(static_cast<Eigen::Index>(gamma.size()));
    auto idx = included();
    for (std::size_t k = 0; k < idx.size(); ++k)
      full[static_cast<Eigen::Index>(idx[k])] = beta_gamma[static_cast<Eigen::Index>(k)];
    return full;
  }
};

/// Conditional Gaussian of beta_gamma given (gamma, z, lambda).
struct PosteriorGaussian {
  IndexList included;
  Vector mean;          // B
  Matrix v_chol;        // lower factor of V
  double log_det_v = 0.0;
  double quad_form = 0.0;  // B' V^-1 B
};

inline IndexList included_indices(const std::vector<std::uint8_t>& gamma) {
  IndexList out;
  for (std::size_t i = 0; i < gamma.size(); ++i)
    if (gamma[i]) out.push_back(i);
  return out;
}

/// Centre each column and scale to unit sample standard deviation (n-1).
inline Matrix standardize(const Matrix& raw) {
  const double n = static_cast<double>(raw.rows());
  if (raw.rows() < 2) throw ConfigError("standardize needs at least 2 rows");
  Matrix out(raw.rows(), raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double mean = raw.col(j).mean();
    Vector c = raw.col(j).array() - mean;
    const double sd = std::sqrt(c.squaredNorm() / (n - 1.0));
    const double scale = raw.col(j).cwiseAbs().maxCoeff();
    if (!(sd > 1e-12 * scale) || sd == 0.0)
      throw ConstantColumnError(static_cast<std::size_t>(j));
    out.col(j) = c / sd;
  }
  return out;
}

namespace detail {

/// Cholesky with the single-retry jitter policy.
inline Eigen::LLT<Matrix> factor_spd(Matrix m, const IndexList& model) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = 1e-10 * m.diagonal().mean();
  m.diagonal().array() += jitter;
  llt.compute(m);
  if (llt.info() != Eigen::Success || !(jitter > 0.0))
    throw FactorizationError(model);
  return llt;
}

inline double log_det_from_llt(const Eigen::LLT<Matrix>& llt) {
  const Matrix& l = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

/// Prior inverse covariance and log|v_S| for model S.
/// `raw_gram` is x_S'x_S, only consulted for the g-prior.
struct PriorBlock {
  Matrix inverse;
  double log_det = 0.0;
};

inline PriorBlock prior_block(const PriorSpec& prior, const Matrix& raw_gram,
                              const IndexList& model) {
  const auto k = static_cast<Eigen::Index>(model.size());
  PriorBlock out;
  if (prior.form == PriorForm::independence) {
    out.inverse = Matrix::Identity(k, k) / prior.c2;
    out.log_det = static_cast<double>(k) * std::log(prior.c2);
  } else {
    out.inverse = raw_gram / prior.c2;
    auto llt = factor_spd(raw_gram, model);
    out.log_det = static_cast<double>(k) * std::log(prior.c2) -
                  log_det_from_llt(llt);
  }
  return out;
}

/// Everything the marginal likelihood and the beta draw need for model S.
struct ModelAlgebra {
  Eigen::LLT<Matrix> precision;  // P = G + v^-1
  Vector b;                      // x_S' W z
  Vector l_inv_b;                // L^-1 b
  double log_det_prior = 0.0;
};

inline ModelAlgebra model_algebra(const Matrix& weighted_gram, const Vector& b,
                                  const PriorBlock& pb, const IndexList& model) {
  ModelAlgebra out;
  out.precision = factor_spd(weighted_gram + pb.inverse, model);
  out.b = b;
  out.l_inv_b = out.precision.matrixL().solve(b);
  out.log_det_prior = pb.log_det;
  return out;
}

inline PosteriorGaussian to_posterior(const ModelAlgebra& a,
                                      const IndexList& model) {
  PosteriorGaussian g;
  g.included = model;
  if (model.empty()) return g;
  const auto k = static_cast<Eigen::Index>(model.size());
  g.mean = a.precision.solve(a.b);
  Matrix v = a.precision.solve(Matrix::Identity(k, k));
  v = 0.5 * (v + v.transpose());
  Eigen::LLT<Matrix> vl(v);
  if (vl.info() != Eigen::Success) throw FactorizationError(model);
  g.v_chol = vl.matrixL();
  g.log_det_v = -log_det_from_llt(a.precision);
  g.quad_form = a.l_inv_b.squaredNorm();
  return g;
}

/// Data-only part of log N(z; 0, T lambda + x_S v_S x_S'):
/// -(n/2) log 2 pi - 1/2 log|T lambda| - 1/2 z'(T lambda)^-1 z.
inline double null_log_density(const Vector& z, const Vector& scaled_lambda) {
  const double n = static_cast<double>(z.size());
  return -0.5 * n * kLog2Pi - 0.5 * scaled_lambda.array().log().sum() -
         0.5 * (z.array().square() / scaled_lambda.array()).sum();
}

inline double model_log_term(const ModelAlgebra& a) {
  // 1/2 log|V| - 1/2 log|v| + 1/2 B'V^-1 B
  return -0.5 * log_det_from_llt(a.precision) - 0.5 * a.log_det_prior +
         0.5 * a.l_inv_b.squaredNorm();
}

inline Matrix gather_columns(const Matrix& x, const IndexList& model) {
  Matrix out(x.rows(), static_cast<Eigen::Index>(model.size()));
  for (std::size_t k = 0; k < model.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(model[k]));
  return out;
}

inline ModelAlgebra direct_algebra(const Dataset& data, const IndexList& model,
                                   const Vector& z, const Vector& scaled_lambda,
                                   const PriorSpec& prior) {
  Matrix xs = gather_columns(data.x, model);
  Vector w = scaled_lambda.cwiseInverse();
  Matrix g = xs.transpose() * w.asDiagonal() * xs;
  Vector b = xs.transpose() * w.cwiseProduct(z);
  Matrix raw;
  if (prior.form == PriorForm::g_prior) raw = xs.transpose() * xs;
  return model_algebra(g, b, prior_block(prior, raw, model), model);
}

}  // namespace detail

/// B = V x_S'(T lambda)^-1 z and V = (x_S'(T lambda)^-1 x_S + v_S^-1)^-1.
inline PosteriorGaussian compute_posterior_gaussian(
    const Dataset& data, const std::vector<std::uint8_t>& gamma,
    const Vector& z, const Vector& lambda, const PriorSpec& prior,
    double temperature = 1.0) {
  auto model = included_indices(gamma);
  if (model.empty()) return PosteriorGaussian{};
  Vector scaled = temperature * lambda;
  auto a = detail::direct_algebra(data, model, z, scaled, prior);
  return detail::to_posterior(a, model);
}

/// log N(z; 0, T lambda + x_S v_S x_S') through the Woodbury route.
inline double log_marginal_z(const Dataset& data,
                             const std::vector<std::uint8_t>& gamma,
                             const Vector& z, const Vector& lambda,
                             const PriorSpec& prior, double temperature = 1.0) {
  Vector scaled = temperature * lambda;
  double base = detail::null_log_density(z, scaled);
  auto model = included_indices(gamma);
  if (model.empty()) return base;
  auto a = detail::direct_algebra(data, model, z, scaled, prior);
  return base + detail::model_log_term(a);
}

/// Marginal likelihood evaluator for a fixed (z, lambda, T).
///
/// Entries of the weighted Gram matrix x' (T lambda)^-1 x are computed a
/// column at a time and cached, so repeated evaluations over nearby models
/// (the inner loop of every Gibbs kernel) cost O(p_gamma^3) each after the
/// columns of the base model are in place.
class MarginalEvaluator {
 public:
  MarginalEvaluator(const Dataset& data, const Vector& z, const Vector& lambda,
                    const PriorSpec& prior, double temperature)
      : data_(data), prior_(prior), z_(z) {
    scaled_ = temperature * lambda;
    weights_ = scaled_.cwiseInverse();
    base_ = detail::null_log_density(z, scaled_);
    xtwz_ = data.x.transpose() * weights_.cwiseProduct(z);
    diag_ = (data.x.array().square().colwise() * weights_.array())
                .colwise()
                .sum()
                .transpose();
    cols_.resize(data.p());
    if (prior.form == PriorForm::g_prior) raw_cols_.resize(data.p());
  }

  double log_marginal(const IndexList& model) {
    ++evaluations_;
    if (model.empty()) return base_;
    return base_ + detail::model_log_term(algebra(model));
  }

  PosteriorGaussian posterior(const IndexList& model) {
    if (model.empty()) return PosteriorGaussian{};
    return detail::to_posterior(algebra(model), model);
  }

  std::size_t evaluations() const noexcept { return evaluations_; }
  const Vector& z() const noexcept { return z_; }

 private:
  detail::ModelAlgebra algebra(const IndexList& model) {
    const auto k = static_cast<Eigen::Index>(model.size());
    Matrix g(k, k);
    Vector b(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      const auto ia = model[static_cast<std::size_t>(a)];
      b[a] = xtwz_[static_cast<Eigen::Index>(ia)];
      g(a, a) = diag_[static_cast<Eigen::Index>(ia)];
      for (Eigen::Index c = 0; c < a; ++c) {
        const auto ic = model[static_cast<std::size_t>(c)];
        g(a, c) = g(c, a) = entry(cols_, weights_, ia, ic);
      }
    }
    Matrix raw;
    if (prior_.form == PriorForm::g_prior) {
      raw.resize(k, k);
      for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index c = 0; c <= a; ++c)
          raw(a, c) = raw(c, a) =
              entry(raw_cols_, ones(), model[static_cast<std::size_t>(a)],
                    model[static_cast<std::size_t>(c)]);
    }
    return detail::model_algebra(g, b, detail::prior_block(prior_, raw, model),
                                 model);
  }

  const Vector& ones() {
    if (ones_.size() == 0) ones_ = Vector::Ones(data_.x.rows());
    return ones_;
  }

  // (x' W x)(i, j) from whichever cached column is available.
  double entry(std::vector<std::optional<Vector>>& cache, const Vector& w,
               std::size_t i, std::size_t j) {
    if (cache[j]) return (*cache[j])[static_cast<Eigen::Index>(i)];
    if (!cache[i])
      cache[i] = data_.x.transpose() *
                 w.cwiseProduct(data_.x.col(static_cast<Eigen::Index>(i)));
    return (*cache[i])[static_cast<Eigen::Index>(j)];
  }

  const Dataset& data_;
  const PriorSpec& prior_;
  Vector z_;
  Vector scaled_, weights_, xtwz_, diag_, ones_;
  double base_ = 0.0;
  std::vector<std::optional<Vector>> cols_, raw_cols_;
  std::size_t evaluations_ = 0;
};

/// x_S beta_S.
inline Vector linear_predictor(const Dataset& data, const IndexList& model,
                               const Vector& beta) {
  Vector eta = Vector::Zero(data.x.rows());
  for (std::size_t k = 0; k < model.size(); ++k)
    eta += beta[static_cast<Eigen::Index>(k)] *
           data.x.col(static_cast<Eigen::Index>(model[k]));
  return eta;
}

namespace detail {

/// log(1 + exp(-m)) without overflow.
inline double log1p_exp_neg(double m) {
  return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

inline double log_normal_cdf(double x) {
  if (x > -30.0) return std::log(0.5 * boost::math::erfc(-x / std::numbers::sqrt2));
  return -0.5 * x * x - std::log(-x) - 0.5 * kLog2Pi;
}

inline double deviance_from_eta(const Dataset& data, const Vector& eta,
                                Link link) {
  double s = 0.0;
  for (std::size_t j = 0; j < data.n(); ++j) {
    const double sign = data.y[j] ? 1.0 : -1.0;
    const double m = sign * eta[static_cast<Eigen::Index>(j)];
    s += link == Link::logistic ? log1p_exp_neg(m) : -log_normal_cdf(m);
  }
  return 2.0 * s;
}

}  // namespace detail

/// -2 log p(y | x, beta) with y recoded to +-1.
inline double deviance(const Dataset& data, const Vector& beta_full,
                       Link link = Link::logistic) {
  return detail::deviance_from_eta(data, data.x * beta_full, link);
}

struct C2Range {
  double low = 0.0;
  double high = 0.0;
};

/// c(e, q) = (1 - q) / (q e) at the mean eigenvalue, for the prior-to-posterior
/// precision ratios 0.1 and 0.005.
inline C2Range prior_c2_range(const std::vector<double>& eigenvalues) {
  if (eigenvalues.empty()) throw ConfigError("prior_c2_range: no eigenvalues");
  double sum = 0.0;
  for (double e : eigenvalues) {
    if (!(e > 0.0)) throw ConfigError("prior_c2_range: eigenvalues must be positive");
    sum += e;
  }
  const double mean = sum / static_cast<double>(eigenvalues.size());
  auto c = [mean](double q) { return (1.0 - q) / (q * mean); };
  return {c(0.1), c(0.005)};
}

/// Reciprocals of the non-zero eigenvalues of the empirical covariance of x.
inline std::vector<double> precision_eigenvalues(const Matrix& x) {
  const double n = static_cast<double>(x.rows());
  Matrix c = x.rowwise() - x.colwise().mean();
  Matrix small = c * c.transpose() / (n - 1.0);  // shares non-zero spectrum
  Eigen::SelfAdjointEigenSolver<Matrix> es(small, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  std::vector<double> out;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > 1e-10 * top) out.push_back(1.0 / ev[i]);
  return out;
}

}  // namespace nbvs
