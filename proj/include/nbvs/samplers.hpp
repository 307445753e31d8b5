#pragma once

// Update kernels for the inclusion indicator and the outer blocked Gibbs loop:
//   (1) z | beta, gamma  then  lambda | z, beta, gamma
//   (2) gamma | z, lambda  (one of the kernels below)  then  beta | gamma, z, lambda

#include <cmath>
#include <ctime>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nbvs/augmentation.hpp"
#include "nbvs/dependence.hpp"
#include "nbvs/errors.hpp"
#include "nbvs/model.hpp"
#include "nbvs/rng.hpp"

namespace nbvs {

enum class KernelKind {
  add_delete,
  full_gibbs,
  neighbourhood_gibbs,
  restricted_gibbs,
  joint_gibbs,
};

inline std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::add_delete: return "add_delete";
    case KernelKind::full_gibbs: return "full_gibbs";
    case KernelKind::neighbourhood_gibbs: return "neighbourhood_gibbs";
    case KernelKind::restricted_gibbs: return "restricted_gibbs";
    case KernelKind::joint_gibbs: return "joint_gibbs";
  }
  return "?";
}

inline KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "add_delete" || s == "ad") return KernelKind::add_delete;
  if (s == "full_gibbs" || s == "full") return KernelKind::full_gibbs;
  if (s == "neighbourhood_gibbs" || s == "neighbourhood" || s == "gibbs")
    return KernelKind::neighbourhood_gibbs;
  if (s == "restricted_gibbs" || s == "restricted" || s == "rgibbs")
    return KernelKind::restricted_gibbs;
  if (s == "joint_gibbs" || s == "joint") return KernelKind::joint_gibbs;
  throw ConfigError("unknown kernel '" + s + "'");
}

inline constexpr std::size_t kMaxJointBlock = 20;

struct KernelSpec {
  KernelKind kind = KernelKind::add_delete;
  std::shared_ptr<const NeighbourhoodGraph> graph;
  std::size_t d = 1;

  bool needs_graph() const {
    return kind == KernelKind::neighbourhood_gibbs ||
           kind == KernelKind::restricted_gibbs || kind == KernelKind::joint_gibbs;
  }

  void validate(std::size_t p) const {
    if (needs_graph()) {
      if (!graph) throw ConfigError(to_string(kind) + " requires a neighbourhood graph");
      if (graph->size() != p)
        throw ConfigError("graph has " + std::to_string(graph->size()) +
                          " nodes, dataset has " + std::to_string(p));
    }
    if (kind == KernelKind::restricted_gibbs || kind == KernelKind::joint_gibbs) {
      if (d < 1) throw ConfigError("block size d must be at least 1");
    }
    if (kind == KernelKind::joint_gibbs && d > kMaxJointBlock)
      throw ConfigError("joint_gibbs block size d = " + std::to_string(d) +
                        " exceeds the enumeration limit of " +
                        std::to_string(kMaxJointBlock));
  }
};

struct RunConfig {
  std::size_t iterations = 1000;  // N
  std::size_t burn_in = 0;        // B
  std::uint64_t seed = 1;
  std::size_t record_every = 1;

  void validate() const {
    if (burn_in >= iterations) throw ConfigError("burn-in must be smaller than N");
    if (record_every < 1) throw ConfigError("record_every must be positive");
  }
};

struct TraceSet {
  std::size_t p = 0;
  std::vector<std::size_t> iteration;  // 1-based iteration number
  std::vector<IndexList> gamma;
  std::vector<double> deviance;
  std::vector<std::size_t> model_size;
  double cpu_seconds = 0.0;

  std::size_t size() const { return gamma.size(); }  // M

  void record(std::size_t it, const ModelState& s, double dev) {
    iteration.push_back(it);
    gamma.push_back(s.included());
    deviance.push_back(dev);
    model_size.push_back(gamma.back().size());
  }
};

/// gamma_i ~ Bernoulli(pi_i), beta ~ N(0, v_gamma), lambda = 1, then one z draw.
inline ModelState init_state_from_prior(const Dataset& data, const PriorSpec& prior,
                                        RngStream& rng, double temperature = 1.0) {
  ModelState s;
  s.temperature = temperature;
  s.gamma.assign(data.p(), 0);
  for (std::size_t i = 0; i < data.p(); ++i) s.gamma[i] = rng.uniform() < prior.pi[i];
  auto model = s.included();
  const auto k = static_cast<Eigen::Index>(model.size());
  s.beta_gamma.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) s.beta_gamma[i] = rng.normal();
  if (k > 0) {
    if (prior.form == PriorForm::independence) {
      s.beta_gamma *= std::sqrt(prior.c2);
    } else {
      Matrix xs = detail::gather_columns(data.x, model);
      auto llt = detail::factor_spd(xs.transpose() * xs, model);
      // cov c2 (x'x)^-1 = c2 L'^-1 L^-1
      s.beta_gamma = std::sqrt(prior.c2) *
                     llt.matrixU().solve(s.beta_gamma).eval();
    }
  }
  s.lambda = Vector::Ones(static_cast<Eigen::Index>(data.n()));
  sample_z(s, data, prior.link, rng);
  return s;
}

namespace detail {

inline void insert_sorted(IndexList& v, std::size_t i) {
  v.insert(std::lower_bound(v.begin(), v.end(), i), i);
}
inline void erase_sorted(IndexList& v, std::size_t i) {
  auto it = std::lower_bound(v.begin(), v.end(), i);
  if (it != v.end() && *it == i) v.erase(it);
}

/// Univariate Gibbs update of gamma_i; `model` mirrors state.gamma.
inline void gibbs_site(ModelState& s, IndexList& model, std::size_t i,
                       MarginalEvaluator& eval, const PriorSpec& prior,
                       RngStream& rng) {
  IndexList with = model, without = model;
  if (s.gamma[i]) erase_sorted(without, i); else insert_sorted(with, i);
  const double log_odds = eval.log_marginal(with) + prior.log_prior(i, true) -
                          eval.log_marginal(without) - prior.log_prior(i, false);
  const double p1 = 1.0 / (1.0 + std::exp(-log_odds));
  const bool on = rng.uniform() < p1;
  s.gamma[i] = on;
  model = on ? std::move(with) : std::move(without);
}

inline void redraw_beta(ModelState& s, const IndexList& model,
                        MarginalEvaluator& eval, RngStream& rng) {
  s.beta_gamma = sample_beta(eval.posterior(model), rng);
}

inline MarginalEvaluator evaluator_for(const ModelState& s, const Dataset& data,
                                       const PriorSpec& prior) {
  return MarginalEvaluator(data, s.z, s.lambda, prior, s.temperature);
}

/// Univariate Gibbs over `sites` (ascending), then one beta draw.
inline void gibbs_sweep(ModelState& s, const IndexList& sites, MarginalEvaluator& eval,
                        const PriorSpec& prior, RngStream& rng) {
  IndexList model = s.included();
  for (auto i : sites) gibbs_site(s, model, i, eval, prior, rng);
  redraw_beta(s, model, eval, rng);
}

inline IndexList restricted_block(const NeighbourhoodGraph& graph, std::size_t d,
                                  RngStream& rng) {
  IndexList block = graph.neighbourhood(rng.pick(graph.size()));
  if (d < block.size()) block = rng.sample_without_replacement(std::move(block), d);
  return block;
}

}  // namespace detail

/// log of the add/delete acceptance ratio (before the min with 1) for flipping
/// gamma_k: marginal-likelihood ratio times the prior odds of the move.
inline double add_delete_log_ratio(const ModelState& s, std::size_t k,
                                   MarginalEvaluator& eval, const PriorSpec& prior) {
  IndexList current = s.included();
  IndexList proposed = current;
  const bool adding = !s.gamma[k];
  if (adding) detail::insert_sorted(proposed, k); else detail::erase_sorted(proposed, k);
  const double prior_odds = adding
                                ? prior.log_prior(k, true) - prior.log_prior(k, false)
                                : prior.log_prior(k, false) - prior.log_prior(k, true);
  return eval.log_marginal(proposed) - eval.log_marginal(current) + prior_odds;
}

inline bool kernel_add_delete(ModelState& s, const Dataset& data,
                              const PriorSpec& prior, RngStream& rng) {
  auto eval = detail::evaluator_for(s, data, prior);
  const std::size_t k = rng.pick(data.p());
  const double log_ratio = add_delete_log_ratio(s, k, eval, prior);
  if (std::log(rng.uniform()) < std::min(0.0, log_ratio)) {
    s.gamma[k] = !s.gamma[k];
    detail::redraw_beta(s, s.included(), eval, rng);
    return true;
  }
  return false;
}

inline void kernel_full_gibbs(ModelState& s, const Dataset& data,
                              const PriorSpec& prior, RngStream& rng) {
  auto eval = detail::evaluator_for(s, data, prior);
  IndexList all(data.p());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  detail::gibbs_sweep(s, all, eval, prior, rng);
}

inline void kernel_neighbourhood_gibbs(ModelState& s, const Dataset& data,
                                       const PriorSpec& prior,
                                       const NeighbourhoodGraph& graph, RngStream& rng) {
  auto eval = detail::evaluator_for(s, data, prior);
  const IndexList block = graph.neighbourhood(rng.pick(data.p()));
  detail::gibbs_sweep(s, block, eval, prior, rng);
}

inline void kernel_restricted_gibbs(ModelState& s, const Dataset& data,
                                    const PriorSpec& prior,
                                    const NeighbourhoodGraph& graph, std::size_t d,
                                    RngStream& rng) {
  auto eval = detail::evaluator_for(s, data, prior);
  const IndexList block = detail::restricted_block(graph, d, rng);
  detail::gibbs_sweep(s, block, eval, prior, rng);
}

/// Joint draw of gamma over a block of at most d members of I_k, by
/// enumerating all 2^|block| configurations. Returns the number of
/// marginal-likelihood evaluations performed.
inline std::size_t kernel_joint_gibbs(ModelState& s, const Dataset& data,
                                      const PriorSpec& prior,
                                      const NeighbourhoodGraph& graph, std::size_t d,
                                      RngStream& rng) {
  if (d > kMaxJointBlock)
    throw ConfigError("joint_gibbs block size exceeds " + std::to_string(kMaxJointBlock));
  auto eval = detail::evaluator_for(s, data, prior);
  const IndexList block = detail::restricted_block(graph, d, rng);
  const std::size_t m = block.size();
  const std::size_t configs = std::size_t{1} << m;

  IndexList rest;
  for (std::size_t i = 0; i < data.p(); ++i)
    if (s.gamma[i] && !std::binary_search(block.begin(), block.end(), i)) rest.push_back(i);

  std::vector<double> score(configs);
  for (std::size_t c = 0; c < configs; ++c) {
    IndexList model = rest;
    double lp = 0.0;
    for (std::size_t b = 0; b < m; ++b) {
      const bool on = (c >> b) & 1u;
      if (on) model.push_back(block[b]);
      lp += prior.log_prior(block[b], on);
    }
    std::sort(model.begin(), model.end());
    score[c] = eval.log_marginal(model) + lp;
  }
  const double top = *std::max_element(score.begin(), score.end());
  double total = 0.0;
  for (auto& v : score) total += (v = std::exp(v - top));
  double u = rng.uniform() * total;
  std::size_t chosen = configs - 1;
  for (std::size_t c = 0; c < configs; ++c) {
    if (u < score[c]) { chosen = c; break; }
    u -= score[c];
  }
  for (std::size_t b = 0; b < m; ++b) s.gamma[block[b]] = (chosen >> b) & 1u;
  detail::redraw_beta(s, s.included(), eval, rng);
  return eval.evaluations();
}

/// Step (2) with the configured kernel.
inline void apply_kernel(const KernelSpec& spec, ModelState& s, const Dataset& data,
                         const PriorSpec& prior, RngStream& rng) {
  switch (spec.kind) {
    case KernelKind::add_delete: kernel_add_delete(s, data, prior, rng); break;
    case KernelKind::full_gibbs: kernel_full_gibbs(s, data, prior, rng); break;
    case KernelKind::neighbourhood_gibbs:
      kernel_neighbourhood_gibbs(s, data, prior, *spec.graph, rng);
      break;
    case KernelKind::restricted_gibbs:
      kernel_restricted_gibbs(s, data, prior, *spec.graph, spec.d, rng);
      break;
    case KernelKind::joint_gibbs:
      kernel_joint_gibbs(s, data, prior, *spec.graph, spec.d, rng);
      break;
  }
}

/// Step (1): z from its lambda-marginal truncated law, then lambda | z.
inline void refresh_latent(ModelState& s, const Dataset& data, const PriorSpec& prior,
                           RngStream& rng) {
  sample_z(s, data, prior.link, rng);
  sample_lambda(s, data, prior.link, rng);
}

inline double state_deviance(const ModelState& s, const Dataset& data, Link link) {
  return detail::deviance_from_eta(
      data, linear_predictor(data, s.included(), s.beta_gamma), link);
}

/// One chain: owns its state and random stream.
class Chain {
 public:
  Chain(const Dataset& data, const PriorSpec& prior, const KernelSpec& kernel,
        RngStream rng, double temperature = 1.0)
      : data_(&data), prior_(&prior), kernel_(&kernel), rng_(std::move(rng)) {
    state_ = init_state_from_prior(data, prior, rng_, temperature);
  }

  /// One outer iteration; with `update_latent` false step (1) is skipped and
  /// the kernel runs against the current (z, lambda).
  void step(bool update_latent = true) {
    if (update_latent) refresh_latent(state_, *data_, *prior_, rng_);
    apply_kernel(*kernel_, state_, *data_, *prior_, rng_);
  }

  ModelState& state() { return state_; }
  const ModelState& state() const { return state_; }
  double deviance() const { return state_deviance(state_, *data_, prior_->link); }

 private:
  const Dataset* data_;
  const PriorSpec* prior_;
  const KernelSpec* kernel_;
  RngStream rng_;
  ModelState state_;
};

/// Progress callback, invoked with the 1-based iteration number.
using ProgressFn = std::function<void(std::size_t)>;

inline void validate_run(const Dataset& data, const PriorSpec& prior,
                         const KernelSpec& kernel, const RunConfig& config) {
  data.validate();
  prior.validate(data.p());
  kernel.validate(data.p());
  config.validate();
}

inline TraceSet run_chain(const Dataset& data, const PriorSpec& prior,
                          const KernelSpec& kernel, const RunConfig& config,
                          RngStream rng, const ProgressFn& progress = {}) {
  validate_run(data, prior, kernel, config);
  Chain chain(data, prior, kernel, std::move(rng));
  TraceSet trace;
  trace.p = data.p();
  std::clock_t start = std::clock();
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    if (it == config.burn_in + 1) start = std::clock();
    chain.step();
    if (it > config.burn_in && (it - config.burn_in - 1) % config.record_every == 0)
      trace.record(it, chain.state(), chain.deviance());
    if (progress) progress(it);
  }
  trace.cpu_seconds = static_cast<double>(std::clock() - start) / CLOCKS_PER_SEC;
  return trace;
}

inline TraceSet run_chain(const Dataset& data, const PriorSpec& prior,
                          const KernelSpec& kernel, const RunConfig& config,
                          const ProgressFn& progress = {}) {
  return run_chain(data, prior, kernel, config, RngStream(config.seed, 0), progress);
}

}  // namespace nbvs
