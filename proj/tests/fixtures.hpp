#pragma once

// Small random instances with fixed (z, lambda) for kernel-invariance checks.

#include <cmath>
#include <functional>
#include <vector>

#include "nbvs/nbvs.hpp"
#include "oracles.hpp"

namespace fixture {

using namespace nbvs;

struct Toy {
  Dataset data;
  Vector z;
  Vector lambda;
  PriorSpec prior;
};

inline Toy random_toy(std::uint64_t seed, std::size_t n = 4, std::size_t p = 3,
                      Link link = Link::logistic, PriorForm form = PriorForm::independence) {
  RngStream rng(seed, 7);
  Toy t;
  t.data.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < t.data.x.rows(); ++j)
    for (Eigen::Index i = 0; i < t.data.x.cols(); ++i) t.data.x(j, i) = rng.normal();
  t.data.y.resize(n);
  t.z.resize(static_cast<Eigen::Index>(n));
  t.lambda.resize(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const double zj = 1.5 * rng.normal();
    t.z[static_cast<Eigen::Index>(j)] = zj;
    t.data.y[j] = zj > 0.0;
    t.lambda[static_cast<Eigen::Index>(j)] =
        link == Link::probit ? 1.0 : std::exp(0.7 * rng.normal()) + 0.2;
  }
  t.prior.pi.resize(p);
  for (auto& v : t.prior.pi) v = 0.2 + 0.6 * rng.uniform();
  t.prior.c2 = 0.5 + 4.5 * rng.uniform();
  t.prior.link = link;
  t.prior.form = form;
  return t;
}

/// State at the toy's (z, lambda) with a random gamma and a conditional beta.
inline ModelState toy_state(const Toy& t, RngStream& rng, double temperature = 1.0) {
  ModelState s;
  s.temperature = temperature;
  s.gamma.resize(t.data.p());
  for (auto& g : s.gamma) g = rng.uniform() < 0.5;
  s.z = t.z;
  s.lambda = t.lambda;
  s.beta_gamma = sample_beta(
      compute_posterior_gaussian(t.data, s.gamma, s.z, s.lambda, t.prior, temperature), rng);
  return s;
}

using KernelFn = std::function<void(ModelState&, RngStream&)>;

/// Long-run model frequencies after `apps` kernel applications (indexed by bit mask).
inline std::vector<double> kernel_frequencies(const Toy& t, const KernelFn& kernel,
                                              std::size_t apps, std::uint64_t seed,
                                              std::size_t warmup = 1000) {
  RngStream rng(seed, 11);
  ModelState s = toy_state(t, rng);
  std::vector<double> freq(1u << t.data.p(), 0.0);
  for (std::size_t a = 0; a < warmup; ++a) kernel(s, rng);
  for (std::size_t a = 0; a < apps; ++a) {
    kernel(s, rng);
    freq[oracle::state_mask(s.gamma)] += 1.0;
  }
  for (auto& f : freq) f /= static_cast<double>(apps);
  return freq;
}

}  // namespace fixture
