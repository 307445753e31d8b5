// Acceptance run: one PASS/FAIL line per criterion; exit status is nonzero if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace nbvs;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... A>
std::string cat(const A&... parts) {
  std::ostringstream s;
  (s << ... << parts);
  return s.str();
}

double median_of(std::vector<double> v) { return median(std::move(v)); }

// --- 1 ---------------------------------------------------------------------

Outcome oracle_equivalence() {
  constexpr std::size_t kInstances = 50, kApps = 200000;
  const auto complete = NeighbourhoodGraph::complete(3);
  const char* names[4] = {"add_delete", "full_gibbs", "neighbourhood(complete)", "joint(d=3)"};
  double worst[4] = {0, 0, 0, 0};
  for (std::size_t inst = 0; inst < kInstances; ++inst) {
    const auto t = fixture::random_toy(1000 + inst);
    const auto truth = oracle::enumerate_posterior(t.data, t.z, t.lambda, t.prior);
    const fixture::KernelFn kernels[4] = {
        [&](ModelState& s, RngStream& r) { kernel_add_delete(s, t.data, t.prior, r); },
        [&](ModelState& s, RngStream& r) { kernel_full_gibbs(s, t.data, t.prior, r); },
        [&](ModelState& s, RngStream& r) { kernel_neighbourhood_gibbs(s, t.data, t.prior, complete, r); },
        [&](ModelState& s, RngStream& r) { kernel_joint_gibbs(s, t.data, t.prior, complete, 3, r); }};
    for (int k = 0; k < 4; ++k) {
      const auto freq = fixture::kernel_frequencies(t, kernels[k], kApps, 7 * inst + k);
      worst[k] = std::max(worst[k], oracle::total_variation(freq, truth));
    }
  }
  Outcome o;
  o.pass = true;
  std::string d = cat(kInstances, " instances x ", kApps, " applications; max TV");
  for (int k = 0; k < 4; ++k) {
    o.pass &= worst[k] <= 0.015;
    d += cat(" ", names[k], "=", fmt("%.4f", worst[k]));
  }
  o.detail = d + " (limit 0.015)";
  return o;
}

// --- 2 ---------------------------------------------------------------------

Outcome smw_identity() {
  RngStream rng(2, 0);
  double worst = 0.0;
  std::size_t count = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t n = 2 + rng.pick(11);          // 2..12
    const std::size_t p = 1 + rng.pick(8);           // 1..8 columns available
    const PriorForm form = inst % 2 ? PriorForm::g_prior : PriorForm::independence;
    auto t = fixture::random_toy(5000 + inst, n, p, Link::logistic, form);
    const double T = 1.0 + 2.0 * rng.uniform();
    std::vector<std::uint8_t> gamma(p);
    for (auto& g : gamma) g = rng.uniform() < 0.6;
    IndexList idx;
    for (std::size_t i = 0; i < p; ++i)
      if (gamma[i]) idx.push_back(i);
    if (form == PriorForm::g_prior && idx.size() >= n) continue;  // x_S'x_S singular
    const Matrix xs = oracle::columns(t.data.x, idx);
    const double dense =
        oracle::dense_log_marginal(xs, t.z, T * t.lambda, oracle::prior_covariance(t.prior, xs));
    const double fast = log_marginal_z(t.data, gamma, t.z, t.lambda, t.prior, T);
    worst = std::max(worst, std::abs(dense - fast));
    ++count;
  }
  return {worst <= 1e-10 && count >= 900,
          cat(count, " instances (p_gamma<=8, n<=12, both prior forms); max |diff| = ",
              fmt("%.2e", worst), " (limit 1e-10)")};
}

// --- 3 ---------------------------------------------------------------------

Outcome augmentation_law() {
  // Step (1) at fixed (beta, gamma) with y drawn from the model each sweep,
  // so the truncations integrate out and the residual law is Logistic(0,1).
  const auto t = fixture::random_toy(3, 6, 3);
  RngStream rng(3, 0);
  ModelState s = fixture::toy_state(t, rng);
  s.gamma = {1, 1, 0};
  s.beta_gamma = Vector(2);
  s.beta_gamma << 1.1, -0.6;
  const Vector eta = linear_predictor(t.data, s.included(), s.beta_gamma);
  Dataset d = t.data;
  std::vector<double> resid, scaled;
  for (int sweep = 0; sweep < 100000; ++sweep) {
    for (std::size_t j = 0; j < d.n(); ++j)
      d.y[j] = rng.uniform() < oracle::logistic_cdf(eta[static_cast<Eigen::Index>(j)]);
    refresh_latent(s, d, t.prior, rng);
    for (Eigen::Index j = 0; j < eta.size(); ++j) {
      resid.push_back(s.z[j] - eta[j]);
      scaled.push_back((s.z[j] - eta[j]) / std::sqrt(s.lambda[j]));
    }
  }
  const double ks_z = oracle::ks_distance(resid, [](double x) { return oracle::logistic_cdf(x); });
  const double ks_mix = oracle::ks_distance(scaled, oracle::normal_cdf);
  double ks_lambda = 0.0;
  for (double r2 : {0.25, 1.0, 4.0}) {
    RngStream lr(31, static_cast<std::uint64_t>(100 * r2));
    std::vector<double> v(100000);
    for (auto& x : v) x = sample_lambda_one(r2, lr);
    const auto cdf = oracle::tabulate_cdf([r2](double l) { return oracle::lambda_target(l, r2); },
                                          1e-3, 400.0);
    ks_lambda = std::max(ks_lambda, oracle::ks_distance(v, cdf));
  }
  return {ks_z < 0.02 && ks_lambda < 0.02,
          cat("KS(z - x beta vs Logistic) = ", fmt("%.4f", ks_z),
              ", max KS(lambda vs quadrature, r2 in {0.25,1,4}) = ", fmt("%.4f", ks_lambda),
              ", KS((z - x beta)/sqrt(lambda) vs N(0,1)) = ", fmt("%.4f", ks_mix), " (limit 0.02)")};
}

// --- 4, 5 ------------------------------------------------------------------

struct ScaledRun {
  FpFn full, pcor;
  double ess_full = 0, ess_pcor = 0, ess_ad = 0;
  double r_pcor = 0, r_ad = 0;
};

std::vector<ScaledRun> scaled_scenario1_runs() {
  std::vector<ScaledRun> out;
  const RunConfig cfg{20000, 5000, 0, 1};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed, 0);
    const auto sim = simulate_scenario1(100, 200, 40, rng);
    const auto prior = PriorSpec::constant(200, 5.0 / 200.0, 5.0);
    auto graph = std::make_shared<NeighbourhoodGraph>(
        estimate_graph(sim.data.x, GraphSource::partial_correlation, 0.9));
    RunConfig c = cfg;
    c.seed = seed;
    const auto full = ess_report(run_chain(sim.data, prior, {KernelKind::full_gibbs, nullptr, 1}, c));
    const auto pcor =
        ess_report(run_chain(sim.data, prior, {KernelKind::neighbourhood_gibbs, graph, 1}, c));
    const auto ad = ess_report(run_chain(sim.data, prior, {KernelKind::add_delete, nullptr, 1}, c));
    ScaledRun r;
    r.full = fp_fn_counts(full.p_hat, sim.truth.true_indices);
    r.pcor = fp_fn_counts(pcor.p_hat, sim.truth.true_indices);
    r.ess_full = full.ess_star;
    r.ess_pcor = pcor.ess_star;
    r.ess_ad = ad.ess_star;
    r.r_pcor = pcor.efficiency_ratio;
    r.r_ad = ad.efficiency_ratio;
    std::printf("  seed %2llu: full fp=%zu fn=%zu ESS*=%.1f | pcor90 fp=%zu fn=%zu ESS*=%.1f R=%.1f/min"
                " | ad ESS*=%.2f R=%.1f/min\n",
                static_cast<unsigned long long>(seed), r.full.fp, r.full.fn, r.ess_full, r.pcor.fp,
                r.pcor.fn, r.ess_pcor, r.r_pcor, r.ess_ad, r.r_ad);
    std::fflush(stdout);
    out.push_back(r);
  }
  return out;
}

Outcome recovery(const std::vector<ScaledRun>& runs) {
  std::vector<double> ffp, ffn, pfp, pfn;
  for (const auto& r : runs) {
    ffp.push_back(static_cast<double>(r.full.fp));
    ffn.push_back(static_cast<double>(r.full.fn));
    pfp.push_back(static_cast<double>(r.pcor.fp));
    pfn.push_back(static_cast<double>(r.pcor.fn));
  }
  const double a = median_of(ffp), b = median_of(ffn), c = median_of(pfp), d = median_of(pfn);
  return {b <= 1 && d <= 1 && a <= 15 && c <= 15,
          cat("10 seeds, p=200 n=100 q=40 N=20000 B=5000: full median FP=", a, " FN=", b,
              "; Pcor90 median FP=", c, " FN=", d, " (limits FP<=15, FN<=1)")};
}

Outcome efficiency(const std::vector<ScaledRun>& runs) {
  double min_ratio = INFINITY;
  std::size_t r_ok = 0, full_ok = 0;
  for (const auto& r : runs) {
    min_ratio = std::min(min_ratio, r.ess_ad > 0 ? r.ess_pcor / r.ess_ad : INFINITY);
    r_ok += r.r_pcor > r.r_ad;
    full_ok += r.ess_pcor < r.ess_full;
  }
  return {min_ratio > 5 && r_ok == runs.size(),
          cat("min ESS*(Pcor90)/ESS*(AD) = ", fmt("%.1f", min_ratio), " (limit >5); R(Pcor90) > R(AD) on ",
              r_ok, "/", runs.size(), " datasets; ESS*(Pcor90) < ESS*(Full) on ", full_ok, "/",
              runs.size())};
}

// --- 6 ---------------------------------------------------------------------

Outcome complete_graph_identity() {
  RngStream rng(6, 0);
  const auto sim = simulate_scenario1(100, 200, 40, rng);
  const auto prior = PriorSpec::constant(200, 5.0 / 200.0, 5.0);
  auto graph = std::make_shared<NeighbourhoodGraph>(
      estimate_graph(sim.data.x, GraphSource::partial_correlation, 0.0));
  const RunConfig cfg{3000, 500, 66, 1};
  const auto a = run_chain(sim.data, prior, {KernelKind::full_gibbs, nullptr, 1}, cfg);
  const auto b = run_chain(sim.data, prior, {KernelKind::neighbourhood_gibbs, graph, 1}, cfg);
  std::size_t mismatches = 0;
  for (std::size_t m = 0; m < a.size(); ++m)
    mismatches += a.gamma[m] != b.gamma[m] || a.deviance[m] != b.deviance[m];
  return {mismatches == 0 && a.size() == b.size() && graph->edge_count() == 200 * 199 / 2,
          cat("C=0 graph with ", graph->edge_count(), " edges; ", a.size(),
              " recorded iterations, ", mismatches, " differing (gamma or deviance)")};
}

// --- 7 ---------------------------------------------------------------------

Outcome ess_units() {
  const std::size_t M = 100000;
  const double constant = ess_ar(std::vector<std::uint8_t>(M, 0));
  std::vector<std::uint8_t> single(M, 0);
  single[M / 2] = 1;
  const double one = ess_ar(single);
  RngStream rng(7, 0);
  std::vector<std::uint8_t> chain(M);
  std::uint8_t s = 0;
  for (auto& v : chain) {
    if (rng.uniform() < 0.25) s = 1 - s;  // lag-1 autocorrelation 0.5
    v = s;
  }
  const double ar = ess_ar(chain);
  const double analytic = M * 0.5 / 1.5;
  const double rel = std::abs(ar / analytic - 1.0);
  return {constant == 0.0 && one == static_cast<double>(M) && rel <= 0.2,
          cat("constant -> ", constant, "; single one -> ", one, " (M=", M, "); AR(1) rho=0.5 -> ",
              fmt("%.0f", ar), " vs analytic ", fmt("%.0f", analytic), " (", fmt("%.1f", 100 * rel),
              "% off, limit 20%)")};
}

// --- 8 ---------------------------------------------------------------------

double log_evidence(const fixture::Toy& t, const Vector& z, const Vector& lambda, double T) {
  std::vector<double> terms;
  for (unsigned m = 0; m < 8; ++m) {
    const auto idx = oracle::mask_members(m, 3);
    const Matrix xs = oracle::columns(t.data.x, idx);
    double lp = oracle::dense_log_marginal(xs, z, T * lambda, oracle::prior_covariance(t.prior, xs));
    for (std::size_t i = 0; i < 3; ++i)
      lp += (m & (1u << i)) ? std::log(t.prior.pi[i]) : std::log(1.0 - t.prior.pi[i]);
    terms.push_back(lp);
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double v : terms) s += std::exp(v - top);
  return top + std::log(s);
}

double tempered_toy_tv(std::uint64_t seed, KernelKind kind) {
  // Chains hold distinct fixed (z, lambda); swaps move them between slots, so
  // the cold chain's law is the evidence-weighted mixture of both conditionals.
  const auto t = fixture::random_toy(seed);
  const double T = 1.2;
  const Vector zb = 2.5 * t.z, lb = 0.5 * t.lambda;
  const double lw = log_evidence(t, t.z, t.lambda, 1.0) + log_evidence(t, zb, lb, T) -
                    log_evidence(t, zb, lb, 1.0) - log_evidence(t, t.z, t.lambda, T);
  const double w = 1.0 / (1.0 + std::exp(-lw));
  const auto pa = oracle::enumerate_posterior(t.data, t.z, t.lambda, t.prior);
  const auto pb = oracle::enumerate_posterior(t.data, zb, lb, t.prior);
  std::vector<double> expected(8);
  for (std::size_t m = 0; m < 8; ++m) expected[m] = w * pa[m] + (1 - w) * pb[m];
  LadderSpec l;
  l.K = 2;
  l.tau = T;
  TemperedEnsemble e(t.data, t.prior, KernelSpec{kind, nullptr, 1}, l, seed);
  e.chain(0).state().z = t.z;
  e.chain(0).state().lambda = t.lambda;
  e.chain(1).state().z = zb;
  e.chain(1).state().lambda = lb;
  for (int i = 0; i < 1000; ++i) e.step(false);
  const std::size_t apps = 200000;
  std::vector<double> freq(8, 0.0);
  for (std::size_t i = 0; i < apps; ++i) {
    e.step(false);
    freq[oracle::state_mask(e.cold().state().gamma)] += 1.0 / static_cast<double>(apps);
  }
  return oracle::total_variation(freq, expected);
}

Simulation scenario2_surrogate(std::uint64_t seed) {
  RngStream rng(seed, 0);
  SurrogateSpec spec;
  spec.columns = 2000;
  const Matrix e = expression_surrogate(spec, rng);
  return simulate_scenario2(e, 200, rng);
}

Outcome tempering() {
  double worst_tv = 0.0;
  for (std::uint64_t seed : {81u, 82u, 83u}) {
    worst_tv = std::max(worst_tv, tempered_toy_tv(seed, KernelKind::add_delete));
    worst_tv = std::max(worst_tv, tempered_toy_tv(seed, KernelKind::full_gibbs));
  }
  const RunConfig cfg{20000, 5000, 0, 1};
  LadderSpec ladder;  // K = 5, tau = 1.2
  ladder.pt_burn_in = 2000;
  double min_ratio = INFINITY;
  std::string per_seed;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto sim = scenario2_surrogate(800 + seed);
    const auto prior = PriorSpec::constant(200, 5.0 / 200.0, 5.0);
    RunConfig c = cfg;
    c.seed = seed;
    const auto pt = run_parallel_tempering(sim.data, prior, KernelSpec{}, ladder, c);
    const auto plain = run_chain(sim.data, prior, KernelSpec{}, c);
    const double a = ess_report(pt.cold).ess_star, b = ess_report(plain).ess_star;
    std::size_t att = 0, acc = 0;
    for (std::size_t j = 0; j < pt.swaps.attempts.size(); ++j) {
      att += pt.swaps.attempts[j];
      acc += pt.swaps.acceptances[j];
    }
    const double ratio = b > 0 ? a / b : INFINITY;
    min_ratio = std::min(min_ratio, ratio);
    per_seed += cat(" [seed ", seed, ": PT ", fmt("%.1f", a), " vs AD ", fmt("%.1f", b), ", swap acc ",
                    fmt("%.2f", static_cast<double>(acc) / static_cast<double>(att)), "]");
  }
  return {worst_tv < 0.015 && min_ratio >= 5,
          cat("(a) K=2 fixed-latent toy max TV = ", fmt("%.4f", worst_tv),
              " (limit 0.015); (b) min ESS*(PT)/ESS*(AD) = ", fmt("%.1f", min_ratio),
              " (limit >=5) at M=15000;", per_seed)};
}

// --- 9 ---------------------------------------------------------------------

Outcome probit_sensitivity() {
  const auto sim = scenario2_surrogate(901);
  const double n = static_cast<double>(sim.data.n());
  const KernelSpec ad{};
  const RunConfig whole{20000, 0, 9, 1};
  auto max_size = [](const TraceSet& t) {
    return *std::max_element(t.model_size.begin(), t.model_size.end());
  };
  const auto probit50 =
      run_chain(sim.data, PriorSpec::constant(200, 0.025, 50.0, Link::probit), ad, whole);
  const auto logit50 =
      run_chain(sim.data, PriorSpec::constant(200, 0.025, 50.0, Link::logistic), ad, whole);
  const auto probit005 = run_chain(sim.data, PriorSpec::constant(200, 0.025, 0.05, Link::probit), ad,
                                   {20000, 5000, 9, 1});
  const auto hits = kTruePredictors -
                    fp_fn_counts(inclusion_probabilities(probit005), sim.truth.true_indices).fn;
  const bool runaway = static_cast<double>(max_size(probit50)) > 0.5 * n;
  const bool contained = static_cast<double>(max_size(logit50)) <= 0.5 * n;
  const bool recovered = hits >= 4;
  return {runaway && contained && recovered,
          cat("surrogate n=104 p=200: probit c2=50 max model size ", max_size(probit50),
              " (needs > ", 0.5 * n, ": ", runaway ? "runaway" : "no runaway",
              "); logistic c2=50 max size ", max_size(logit50), contained ? " (contained)" : " (runaway)",
              "; probit c2=0.05 recovers ", hits, "/5 (needs >=4)")};
}

// --- 10 --------------------------------------------------------------------

Outcome shrinkage() {
  double worst_l = 0.0, worst_r = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed, 10);
    Matrix x(20, 5);
    for (Eigen::Index j = 0; j < 20; ++j) {
      const double f = rng.normal();
      for (Eigen::Index i = 0; i < 5; ++i) x(j, i) = rng.normal() + 0.4 * static_cast<double>(i) * f;
    }
    const auto est = shrinkage_correlation(x);
    const auto ref = oracle::shrinkage_transcription(x);
    worst_l = std::max(worst_l, std::abs(est.lambda_star - ref.lambda_star));
    worst_r = std::max(worst_r, (est.r_hat - ref.r_hat).cwiseAbs().maxCoeff());
  }
  ShrinkageEstimate chain;
  chain.r_hat.resize(3, 3);
  chain.r_hat << 1.0, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 1.0;
  const double rho13 = std::abs(partial_correlation(chain)(0, 2));
  return {worst_l <= 1e-12 && worst_r <= 1e-12 && rho13 <= 1e-12,
          cat("10 fixtures (p=5, n=20): max |dLambda*| = ", fmt("%.1e", worst_l), ", max |d r_hat| = ",
              fmt("%.1e", worst_r), "; chain |rho_13| = ", fmt("%.1e", rho13), " (limit 1e-12)")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::function<Outcome()>& f) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("%s criterion %d: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, oracle_equivalence);
  report(2, smw_identity);
  report(3, augmentation_law);
  std::vector<ScaledRun> runs;
  const auto start = std::chrono::steady_clock::now();
  try {
    runs = scaled_scenario1_runs();
  } catch (const std::exception& e) {
    std::printf("  scaled scenario 1 runs failed: %s\n", e.what());
  }
  std::printf("  scaled scenario 1 runs took %.1f s\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  report(4, [&] { return runs.size() == 10 ? recovery(runs) : Outcome{false, "runs missing"}; });
  report(5, [&] { return runs.size() == 10 ? efficiency(runs) : Outcome{false, "runs missing"}; });
  report(6, complete_graph_identity);
  report(7, ess_units);
  report(8, tempering);
  report(9, probit_sensitivity);
  report(10, shrinkage);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
