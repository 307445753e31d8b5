// nbvs: batch front end. Exit codes: 0 success, 2 configuration error,
// 3 numerical error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nbvs/nbvs.hpp"

namespace fs = std::filesystem;
using namespace nbvs;

namespace {

constexpr std::uint64_t kGraphStreamId = 0x4752'4150'4800'0000ull;
constexpr std::uint64_t kSimStreamId = 0x5349'4d00'0000'0000ull;

struct SimulateArgs {
  int scenario = 1;
  std::uint64_t seed = 1;
  std::size_t n = 100, p = 500, q = 100;
  std::string matrix;
  bool surrogate = false;
  std::size_t surrogate_n = 104, surrogate_columns = 7129, surrogate_factors = 40;
  bool standardize = false;
  std::string out = "sim";
};

int cmd_simulate(const SimulateArgs& a) {
  RngStream rng(a.seed, kSimStreamId);
  Simulation sim;
  if (a.scenario == 1) {
    sim = simulate_scenario1(a.n, a.p, a.q, rng);
    if (a.standardize) sim.data.x = standardize(sim.data.x);
  } else if (a.scenario == 2) {
    Matrix expr;
    std::vector<std::string> labels;
    if (!a.matrix.empty()) {
      expr = io::read_matrix(a.matrix, &labels);
    } else if (a.surrogate) {
      SurrogateSpec spec;
      spec.n = a.surrogate_n;
      spec.columns = a.surrogate_columns;
      spec.factors = a.surrogate_factors;
      expr = expression_surrogate(spec, rng);
    } else {
      throw ConfigError("scenario 2 needs --matrix <csv> or --surrogate");
    }
    sim = simulate_scenario2(expr, a.p, rng, labels);
  } else {
    throw ConfigError("--scenario must be 1 or 2");
  }
  const fs::path out(a.out);
  io::write_dataset(out / "dataset.csv", sim.data);
  io::write_truth(out / "truth.csv", sim.truth);
  std::cerr << "wrote " << sim.data.n() << "x" << sim.data.p() << " dataset to "
            << (out / "dataset.csv").string() << "\n";
  return 0;
}

struct DepsArgs {
  std::string dataset;
  std::string source = "pcor";
  double threshold = 0.9;
  double mean_degree = 10.0;
  std::uint64_t seed = 1;
  std::string out = "graph.csv";
  std::string matrix_out;
};

int cmd_estimate_deps(const DepsArgs& a) {
  const Dataset data = io::read_dataset(a.dataset);
  const GraphSource source = parse_graph_source(a.source);
  NeighbourhoodGraph g;
  if (source == GraphSource::random) {
    RngStream rng(a.seed, kGraphStreamId);
    g = random_graph(data.p(), a.mean_degree, rng);
  } else {
    if (!(a.threshold >= 0.0 && a.threshold < 1.0))
      throw ConfigError("--C must lie in [0,1)");
    auto est = shrinkage_correlation(data.x);
    Matrix coef = source == GraphSource::correlation ? est.r_hat : partial_correlation(est);
    g = threshold_graph(coef, a.threshold, source);
    if (!a.matrix_out.empty()) io::write_matrix(a.matrix_out, coef, data.column_labels);
    std::cerr << "shrinkage intensity " << io::fmt(est.lambda_star) << "\n";
  }
  io::write_edges(a.out, g);
  std::cerr << g.edge_count() << " edges, mean degree " << g.mean_degree() << "\n";
  return 0;
}

PriorSpec resolve_prior(const ExperimentConfig& c, std::size_t p) {
  PriorSpec prior;
  prior.c2 = c.c2;
  prior.link = c.link;
  prior.form = c.form;
  if (!c.pi_file.empty()) {
    const auto lines = io::read_lines(c.pi_file);
    for (const auto& l : lines) {
      double v;
      if (io::parse_double(io::trim(l), v)) prior.pi.push_back(v);
      else if (!prior.pi.empty()) throw ConfigError(c.pi_file + ": '" + l + "' is not a number");
    }
  } else {
    prior.pi.assign(p, c.pi ? *c.pi : static_cast<double>(kTruePredictors) /
                                          static_cast<double>(p));
  }
  prior.validate(p);
  return prior;
}

std::shared_ptr<const NeighbourhoodGraph> resolve_graph(const ExperimentConfig& c,
                                                        const Dataset& data) {
  if (!c.graph_file.empty())
    return std::make_shared<NeighbourhoodGraph>(io::read_edges(c.graph_file, data.p()));
  if (c.graph_source == GraphSource::random) {
    RngStream rng(c.seed, kGraphStreamId);
    return std::make_shared<NeighbourhoodGraph>(random_graph(data.p(), c.mean_degree, rng));
  }
  return std::make_shared<NeighbourhoodGraph>(
      estimate_graph(data.x, c.graph_source, c.threshold));
}

int cmd_run(ExperimentConfig c) {
  c.validate();
  const Dataset data = io::read_dataset(c.dataset);
  const PriorSpec prior = resolve_prior(c, data.p());
  KernelSpec kernel;
  kernel.kind = c.kernel;
  kernel.d = c.d;
  if (kernel.needs_graph()) kernel.graph = resolve_graph(c, data);

  auto progress = [](std::size_t it) {
    if (it % 10000 == 0) std::cerr << "iteration " << it << "\n";
  };
  TraceSet trace;
  io::Meta meta;
  meta.emplace_back("kernel", to_string(c.kernel));
  if (c.tempering) {
    auto res = run_parallel_tempering(data, prior, kernel, c.ladder(), c.run_config(), progress);
    trace = std::move(res.cold);
    for (std::size_t j = 0; j < res.swaps.attempts.size(); ++j) {
      const std::string pair = "swap." + std::to_string(j) + "-" + std::to_string(j + 1);
      meta.emplace_back(pair + ".attempts", std::to_string(res.swaps.attempts[j]));
      meta.emplace_back(pair + ".acceptances", std::to_string(res.swaps.acceptances[j]));
    }
  } else {
    trace = run_chain(data, prior, kernel, c.run_config(), progress);
  }
  meta.insert(meta.begin() + 1,
              {{"N", std::to_string(c.iterations)},
               {"B", std::to_string(c.burn_in)},
               {"M", std::to_string(trace.size())},
               {"seed", std::to_string(c.seed)},
               {"cpu_seconds", io::fmt(trace.cpu_seconds)},
               {"n", std::to_string(data.n())},
               {"p", std::to_string(data.p())}});
  if (kernel.graph) meta.emplace_back("graph_edges", std::to_string(kernel.graph->edge_count()));
  for (const auto& k : ExperimentConfig::keys()) meta.emplace_back("config." + k, c.get(k));
  io::write_traces(c.output_dir, trace, meta);
  std::cerr << "recorded " << trace.size() << " iterations in " << c.output_dir << "\n";
  return 0;
}

struct DiagnoseArgs {
  std::string traces;
  std::string truth;
  double cutoff = 0.05;
  std::string out;
};

int cmd_diagnose(const DiagnoseArgs& a) {
  const TraceSet trace = io::read_traces(a.traces);
  const EssReport report = ess_report(trace);
  std::optional<FpFn> counts;
  if (!a.truth.empty()) counts = fp_fn_counts(report.p_hat, io::read_truth(a.truth), a.cutoff);
  const fs::path out = a.out.empty() ? fs::path(a.traces) : fs::path(a.out);
  io::write_diagnostics(out / "diagnostics.csv", report);
  io::write_summary(out / "summary.csv", report, counts, a.cutoff);
  std::cout << "ess_star " << io::fmt(report.ess_star) << "  visited " << report.visited_count
            << "  R/min " << io::fmt(report.efficiency_ratio);
  if (counts) std::cout << "  fp " << counts->fp << "  fn " << counts->fn;
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian variable selection for binary regression"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "generate a simulation dataset with known truth");
  s->add_option("--scenario", sim.scenario, "1 (block design) or 2 (expression-backed)");
  s->add_option("--seed", sim.seed);
  s->add_option("--n", sim.n, "samples (scenario 1)");
  s->add_option("--p", sim.p, "covariates");
  s->add_option("--q", sim.q, "block size (scenario 1)");
  s->add_option("--matrix", sim.matrix, "expression matrix CSV (scenario 2)");
  s->add_flag("--surrogate", sim.surrogate, "use the synthetic expression surrogate");
  s->add_option("--surrogate-n", sim.surrogate_n);
  s->add_option("--surrogate-columns", sim.surrogate_columns);
  s->add_option("--surrogate-factors", sim.surrogate_factors);
  s->add_flag("--standardize", sim.standardize, "standardize scenario 1 covariates");
  s->add_option("--out", sim.out, "output directory");

  DepsArgs deps;
  auto* e = app.add_subcommand("estimate-deps", "estimate a neighbourhood graph");
  e->add_option("--dataset", deps.dataset)->required();
  e->add_option("--source", deps.source, "pcor, corr or random");
  e->add_option("--C", deps.threshold, "threshold percentile in [0,1)");
  e->add_option("--mean-degree", deps.mean_degree, "random graphs only");
  e->add_option("--seed", deps.seed);
  e->add_option("--out", deps.out, "edge list CSV");
  e->add_option("--matrix-out", deps.matrix_out, "write the thresholded coefficient matrix");

  std::string config_path;
  std::map<std::string, std::string> overrides;
  auto* r = app.add_subcommand("run", "run a sampler and write traces");
  r->add_option("--config", config_path, "key = value configuration file");
  const std::vector<std::pair<std::string, std::string>> flag_keys = {
      {"--dataset", "dataset"},          {"--out", "output_dir"},
      {"--pi", "prior.pi"},              {"--pi-file", "prior.pi_file"},
      {"--c2", "prior.c2"},              {"--link", "prior.link"},
      {"--prior-form", "prior.form"},    {"--kernel", "kernel.kind"},
      {"--d", "kernel.d"},               {"--graph", "kernel.graph"},
      {"--source", "kernel.source"},     {"--C", "kernel.C"},
      {"--mean-degree", "kernel.mean_degree"}, {"--N", "run.N"},
      {"--B", "run.B"},                  {"--seed", "run.seed"},
      {"--record-every", "run.record_every"}, {"--tempering", "tempering.enabled"},
      {"--K", "tempering.K"},            {"--tau", "tempering.tau"},
      {"--swap-interval", "tempering.swap_interval"},
      {"--pt-burn-in", "tempering.pt_burn_in"}};
  for (const auto& [flag, key] : flag_keys)
    r->add_option(flag, overrides[key], "sets " + key);

  DiagnoseArgs diag;
  auto* g = app.add_subcommand("diagnose", "mixing diagnostics from a trace directory");
  g->add_option("--traces", diag.traces)->required();
  g->add_option("--truth", diag.truth, "truth.csv for FP/FN counts");
  g->add_option("--cutoff", diag.cutoff, "inclusion-probability cutoff");
  g->add_option("--out", diag.out, "output directory (default: trace directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 2;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*e) return cmd_estimate_deps(deps);
    if (*r) {
      ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
      for (const auto& [flag, key] : flag_keys)
        if (r->count(flag) > 0) c.set(key, overrides[key]);
      return cmd_run(c);
    }
    if (*g) return cmd_diagnose(diag);
  } catch (const ConfigError& ex) {
    std::cerr << "configuration error: " << ex.what() << "\n";
    return 2;
  } catch (const NumericalError& ex) {
    std::cerr << "numerical error: " << ex.what() << "\n";
    return 3;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
