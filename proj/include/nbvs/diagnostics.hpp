#pragma once

// Mixing diagnostics over recorded indicator traces.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "nbvs/errors.hpp"
#include "nbvs/model.hpp"
#include "nbvs/samplers.hpp"

namespace nbvs {

/// Effective sample size of a scalar trace from an AR(k) fit.
///
/// Orders k = 0..floor(10 log10 M) are fit by least squares on a common
/// sample (t = kmax..M-1, m rows) of the centred series; the order minimising
///   AIC = m log(RSS/m) + 2k
/// wins, ties going to the smaller k. The integrated autocorrelation time of
/// the fitted process is its spectral density at zero over its variance,
///   tau = sigma^2 / (gamma_0 (1 - sum phi)^2),
/// with sigma^2 = RSS/m and gamma_0 taken over the same m rows, floored at 1,
/// so ESS = M / tau <= M. Order 0 gives ESS = M. Constant traces give 0.
template <class T>
double ess_ar(const std::vector<T>& trace) {
  const std::size_t M = trace.size();
  if (M < 2) return static_cast<double>(M);
  const double first = static_cast<double>(trace[0]);
  bool constant = true;
  for (auto v : trace)
    if (static_cast<double>(v) != first) { constant = false; break; }
  if (constant) return 0.0;

  const double Md = static_cast<double>(M);
  double mean = 0.0;
  for (auto v : trace) mean += static_cast<double>(v);
  mean /= Md;
  std::vector<double> x(M);
  for (std::size_t t = 0; t < M; ++t) x[t] = static_cast<double>(trace[t]) - mean;

  std::size_t kmax = static_cast<std::size_t>(std::floor(10.0 * std::log10(Md)));
  kmax = std::max<std::size_t>(1, std::min(kmax, M - 2));
  if (M <= kmax + 1) return Md;
  const std::size_t rows = M - kmax;
  const double m = static_cast<double>(rows);

  // prefix[d][s] = sum_{u < s} x_u x_{u+d}
  std::vector<std::vector<double>> prefix(kmax + 1);
  for (std::size_t d = 0; d <= kmax; ++d) {
    auto& pd = prefix[d];
    pd.assign(M - d + 1, 0.0);
    for (std::size_t s = 0; s + d < M; ++s) pd[s + 1] = pd[s] + x[s] * x[s + d];
  }
  // sum_{t=kmax}^{M-1} x_{t-a} x_{t-b}, a <= b
  auto lagged = [&](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    const std::size_t d = b - a;
    const std::size_t lo = kmax - b, hi = M - b;  // s = t - b in [lo, hi)
    return prefix[d][hi] - prefix[d][lo];
  };

  const double yy = lagged(0, 0);
  if (!(yy > 0.0)) return Md;
  double best_aic = m * std::log(yy / m);
  double best_sum = 0.0, best_rss = yy;
  for (std::size_t k = 1; k <= kmax; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    Matrix g(kk, kk);
    Vector h(kk);
    for (std::size_t a = 1; a <= k; ++a) {
      h[static_cast<Eigen::Index>(a - 1)] = lagged(0, a);
      for (std::size_t b = 1; b <= k; ++b)
        g(static_cast<Eigen::Index>(a - 1), static_cast<Eigen::Index>(b - 1)) = lagged(a, b);
    }
    Eigen::LDLT<Matrix> ldlt(g);
    if (ldlt.info() != Eigen::Success) continue;
    const Vector phi = ldlt.solve(h);
    if (!phi.allFinite()) continue;
    const double rss = std::max(yy - phi.dot(h), 0.0);
    const double aic = m * std::log(rss / m) + 2.0 * static_cast<double>(k);
    if (aic < best_aic) {
      best_aic = aic;
      best_sum = phi.sum();
      best_rss = rss;
    }
  }
  const double sigma2 = best_rss / m;
  if (!(sigma2 > 0.0)) return Md;
  const double gamma0 = yy / m;
  const double ess = Md * gamma0 * (1.0 - best_sum) * (1.0 - best_sum) / sigma2;
  if (!std::isfinite(ess)) return Md;
  return std::clamp(ess, 0.0, Md);
}

/// Per-variable 0/1 traces, variable-major.
inline std::vector<std::vector<std::uint8_t>> indicator_traces(const TraceSet& trace) {
  std::vector<std::vector<std::uint8_t>> out(trace.p,
                                             std::vector<std::uint8_t>(trace.size(), 0));
  for (std::size_t m = 0; m < trace.size(); ++m)
    for (auto i : trace.gamma[m]) out[i][m] = 1;
  return out;
}

inline std::vector<double> inclusion_probabilities(const TraceSet& trace) {
  if (trace.size() == 0) throw ConfigError("inclusion probabilities need M >= 1");
  std::vector<double> count(trace.p, 0.0);
  for (const auto& g : trace.gamma)
    for (auto i : g) count[i] += 1.0;
  for (auto& c : count) c /= static_cast<double>(trace.size());
  return count;
}

/// i is visited when gamma_i = 1 at least once.
inline std::vector<std::uint8_t> visited_flags(const TraceSet& trace) {
  std::vector<std::uint8_t> v(trace.p, 0);
  for (const auto& g : trace.gamma)
    for (auto i : g) v[i] = 1;
  return v;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// (#visited / p) * median ESS over visited variables; 0 if none visited.
inline double ess_star(const std::vector<double>& ess,
                       const std::vector<std::uint8_t>& visited) {
  if (ess.size() != visited.size()) throw ConfigError("ess_star: length mismatch");
  if (ess.empty()) return 0.0;
  std::vector<double> sel;
  for (std::size_t i = 0; i < ess.size(); ++i)
    if (visited[i]) sel.push_back(ess[i]);
  if (sel.empty()) return 0.0;
  return static_cast<double>(sel.size()) / static_cast<double>(ess.size()) * median(sel);
}

/// R = ESS* / t.
inline double efficiency_ratio(double ess_star_value, double t) {
  if (!(t > 0.0)) throw ConfigError("efficiency ratio needs positive time");
  return ess_star_value / t;
}

struct FpFn {
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// fp: non-true variables with p_hat > cutoff; fn: true variables with p_hat <= cutoff.
inline FpFn fp_fn_counts(const std::vector<double>& p_hat, const IndexList& truth,
                         double cutoff = 0.05) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw ConfigError("cutoff must lie in (0,1)");
  std::vector<std::uint8_t> is_true(p_hat.size(), 0);
  for (auto i : truth) {
    if (i >= p_hat.size()) throw ConfigError("truth index outside variable range");
    is_true[i] = 1;
  }
  FpFn out;
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    if (is_true[i] && !(p_hat[i] > cutoff)) ++out.fn;
    if (!is_true[i] && p_hat[i] > cutoff) ++out.fp;
  }
  return out;
}

struct EssReport {
  std::vector<double> ess_per_variable;
  std::vector<double> p_hat;
  std::vector<std::uint8_t> visited;
  double ess_star = 0.0;
  std::size_t visited_count = 0;
  double cpu_seconds = 0.0;
  double efficiency_ratio = 0.0;  // ESS* per CPU minute; NaN when no time was recorded
};

inline EssReport ess_report(const TraceSet& trace) {
  EssReport r;
  r.p_hat = inclusion_probabilities(trace);
  r.visited = visited_flags(trace);
  r.ess_per_variable.assign(trace.p, 0.0);
  const auto series = indicator_traces(trace);
  for (std::size_t i = 0; i < trace.p; ++i) {
    if (!r.visited[i]) continue;
    ++r.visited_count;
    r.ess_per_variable[i] = ess_ar(series[i]);
  }
  r.ess_star = ess_star(r.ess_per_variable, r.visited);
  r.cpu_seconds = trace.cpu_seconds;
  r.efficiency_ratio = trace.cpu_seconds > 0.0
                           ? efficiency_ratio(r.ess_star, trace.cpu_seconds / 60.0)
                           : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace nbvs
