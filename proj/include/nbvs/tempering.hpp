#pragma once

// Parallel tempering over a geometric ladder {1, tau, ..., tau^(K-1)}.
// Chain k runs the tempered conditionals at T_k with stream (seed, k);
// swap decisions use a dedicated stream. States move between slots,
// temperatures stay with the slot, so slot 0 is always the cold chain.

#include <cmath>
#include <ctime>
#include <vector>

#include "nbvs/errors.hpp"
#include "nbvs/model.hpp"
#include "nbvs/rng.hpp"
#include "nbvs/samplers.hpp"

namespace nbvs {

inline constexpr std::uint64_t kSwapStreamId = 0x5357'4150'0000'0000ull;

struct LadderSpec {
  double tau = 1.2;
  std::size_t K = 5;
  std::size_t swap_interval = 1;
  std::size_t pt_burn_in = 0;

  std::vector<double> temperatures() const {
    std::vector<double> t(K);
    for (std::size_t k = 0; k < K; ++k) t[k] = std::pow(tau, static_cast<double>(k));
    return t;
  }

  void validate() const {
    if (K < 1) throw ConfigError("ladder needs at least one chain");
    if (K > 1 && !(tau > 1.0)) throw ConfigError("tau must exceed 1");
    if (swap_interval < 1) throw ConfigError("swap interval must be positive");
  }
};

/// r' lambda^-1 r with r = z - x_gamma beta_gamma.
inline double residual_quadratic(const ModelState& s, const Dataset& data) {
  const Vector r = s.z - linear_predictor(data, s.included(), s.beta_gamma);
  return (r.array().square() / s.lambda.array()).sum();
}

/// Unclipped log swap ratio (1/T_a - 1/T_b) (q_a - q_b) / 2.
inline double swap_log_ratio(double q_a, double q_b, double t_a, double t_b) {
  return (1.0 / t_a - 1.0 / t_b) * (-0.5 * q_b + 0.5 * q_a);
}

inline double swap_log_acceptance(double q_a, double q_b, double t_a, double t_b) {
  return std::min(0.0, swap_log_ratio(q_a, q_b, t_a, t_b));
}

inline double swap_log_acceptance(const ModelState& a, const ModelState& b, double t_a,
                                  double t_b, const Dataset& data) {
  return swap_log_acceptance(residual_quadratic(a, data), residual_quadratic(b, data),
                             t_a, t_b);
}

struct SwapStats {
  std::vector<std::size_t> attempts;     // pair (j, j+1) at index j
  std::vector<std::size_t> acceptances;
};

struct TemperingResult {
  TraceSet cold;
  SwapStats swaps;
  std::vector<double> temperatures;
};

/// Exchange (gamma, beta, z, lambda); each slot keeps its temperature.
inline void exchange_states(ModelState& a, ModelState& b) {
  std::swap(a.gamma, b.gamma);
  std::swap(a.beta_gamma, b.beta_gamma);
  std::swap(a.z, b.z);
  std::swap(a.lambda, b.lambda);
}

/// K chains on the ladder plus the swap stream.
class TemperedEnsemble {
 public:
  TemperedEnsemble(const Dataset& data, const PriorSpec& prior, const KernelSpec& kernel,
                   const LadderSpec& ladder, std::uint64_t seed)
      : data_(&data), ladder_(ladder), temperatures_(ladder.temperatures()),
        swap_rng_(seed, kSwapStreamId) {
    ladder.validate();
    chains_.reserve(ladder.K);
    for (std::size_t k = 0; k < ladder.K; ++k)
      chains_.emplace_back(data, prior, kernel, RngStream(seed, k), temperatures_[k]);
    const std::size_t pairs = ladder.K > 1 ? ladder.K - 1 : 0;
    swaps_.attempts.assign(pairs, 0);
    swaps_.acceptances.assign(pairs, 0);
  }

  /// Advance every chain once, then (past the un-coupled phase, on the swap
  /// schedule) propose exchanging one uniformly chosen adjacent pair.
  void step(bool update_latent = true) {
    ++iteration_;
    for (auto& c : chains_) c.step(update_latent);
    const std::size_t K = chains_.size();
    if (K < 2 || iteration_ <= ladder_.pt_burn_in ||
        (iteration_ - ladder_.pt_burn_in) % ladder_.swap_interval != 0)
      return;
    const std::size_t j = swap_rng_.pick(K - 1);
    ++swaps_.attempts[j];
    const double log_alpha = swap_log_acceptance(chains_[j].state(), chains_[j + 1].state(),
                                                 temperatures_[j], temperatures_[j + 1], *data_);
    if (std::log(swap_rng_.uniform()) < log_alpha) {
      exchange_states(chains_[j].state(), chains_[j + 1].state());
      ++swaps_.acceptances[j];
    }
  }

  std::size_t size() const { return chains_.size(); }
  Chain& chain(std::size_t k) { return chains_[k]; }
  const Chain& chain(std::size_t k) const { return chains_[k]; }
  Chain& cold() { return chains_[0]; }
  const std::vector<double>& temperatures() const { return temperatures_; }
  const SwapStats& swaps() const { return swaps_; }
  std::size_t iteration() const { return iteration_; }

 private:
  const Dataset* data_;
  LadderSpec ladder_;
  std::vector<double> temperatures_;
  std::vector<Chain> chains_;
  RngStream swap_rng_;
  SwapStats swaps_;
  std::size_t iteration_ = 0;
};

inline TemperingResult run_parallel_tempering(const Dataset& data, const PriorSpec& prior,
                                              const KernelSpec& kernel,
                                              const LadderSpec& ladder,
                                              const RunConfig& config,
                                              const ProgressFn& progress = {}) {
  validate_run(data, prior, kernel, config);
  TemperedEnsemble ensemble(data, prior, kernel, ladder, config.seed);
  TemperingResult out;
  TraceSet& trace = out.cold;
  trace.p = data.p();
  std::clock_t start = std::clock();
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    if (it == config.burn_in + 1) start = std::clock();
    ensemble.step();
    if (it > config.burn_in && (it - config.burn_in - 1) % config.record_every == 0)
      trace.record(it, ensemble.cold().state(), ensemble.cold().deviance());
    if (progress) progress(it);
  }
  trace.cpu_seconds = static_cast<double>(std::clock() - start) / CLOCKS_PER_SEC;
  out.swaps = ensemble.swaps();
  out.temperatures = ensemble.temperatures();
  return out;
}

}  // namespace nbvs
