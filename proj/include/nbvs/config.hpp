#pragma once

// Flat key = value experiment configuration.
//
//   # comment
//   key = value
//
// Keys are fixed (see ExperimentConfig::keys()); unknown or repeated keys are
// errors. `serialize` emits every key, so parse(serialize(c)) == c.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nbvs/dependence.hpp"
#include "nbvs/errors.hpp"
#include "nbvs/io.hpp"
#include "nbvs/model.hpp"
#include "nbvs/samplers.hpp"
#include "nbvs/tempering.hpp"

namespace nbvs {

struct ExperimentConfig {
  std::string dataset;
  std::string output_dir = "out";

  std::optional<double> pi;  // unset: p*/p with p* = 5
  std::string pi_file;
  double c2 = 5.0;
  Link link = Link::logistic;
  PriorForm form = PriorForm::independence;

  KernelKind kernel = KernelKind::add_delete;
  std::size_t d = 5;
  std::string graph_file;
  GraphSource graph_source = GraphSource::partial_correlation;
  double threshold = 0.9;
  double mean_degree = 10.0;

  std::size_t iterations = 20000;
  std::size_t burn_in = 5000;
  std::uint64_t seed = 1;
  std::size_t record_every = 1;

  bool tempering = false;
  std::size_t chains = 5;
  double tau = 1.2;
  std::size_t swap_interval = 1;
  std::size_t pt_burn_in = 0;

  bool operator==(const ExperimentConfig&) const = default;

  static const std::vector<std::string>& keys() {
    static const std::vector<std::string> k = {
        "dataset",       "output_dir",       "prior.pi",        "prior.pi_file",
        "prior.c2",      "prior.link",       "prior.form",      "kernel.kind",
        "kernel.d",      "kernel.graph",     "kernel.source",   "kernel.C",
        "kernel.mean_degree", "run.N",       "run.B",           "run.seed",
        "run.record_every", "tempering.enabled", "tempering.K", "tempering.tau",
        "tempering.swap_interval", "tempering.pt_burn_in"};
    return k;
  }

  void set(const std::string& key, const std::string& raw) {
    const std::string v = io::trim(raw);
    const std::string where = "config key '" + key + "'";
    auto real = [&] { return io::to_double(v, where); };
    auto count = [&] { return io::to_index(v, where); };
    auto flag = [&] {
      if (v == "true" || v == "1" || v == "yes") return true;
      if (v == "false" || v == "0" || v == "no") return false;
      throw ConfigError(where + ": expected true/false, got '" + v + "'");
    };
    if (key == "dataset") dataset = v;
    else if (key == "output_dir") output_dir = v;
    else if (key == "prior.pi") pi = v == "auto" ? std::nullopt : std::optional<double>(real());
    else if (key == "prior.pi_file") pi_file = v;
    else if (key == "prior.c2") c2 = real();
    else if (key == "prior.link") {
      if (v == "logistic") link = Link::logistic;
      else if (v == "probit") link = Link::probit;
      else throw ConfigError(where + ": expected logistic or probit");
    } else if (key == "prior.form") {
      if (v == "independence") form = PriorForm::independence;
      else if (v == "g_prior" || v == "g") form = PriorForm::g_prior;
      else throw ConfigError(where + ": expected independence or g_prior");
    } else if (key == "kernel.kind") kernel = parse_kernel_kind(v);
    else if (key == "kernel.d") d = count();
    else if (key == "kernel.graph") graph_file = v;
    else if (key == "kernel.source") graph_source = parse_graph_source(v);
    else if (key == "kernel.C") threshold = real();
    else if (key == "kernel.mean_degree") mean_degree = real();
    else if (key == "run.N") iterations = count();
    else if (key == "run.B") burn_in = count();
    else if (key == "run.seed") seed = static_cast<std::uint64_t>(count());
    else if (key == "run.record_every") record_every = count();
    else if (key == "tempering.enabled") tempering = flag();
    else if (key == "tempering.K") chains = count();
    else if (key == "tempering.tau") tau = real();
    else if (key == "tempering.swap_interval") swap_interval = count();
    else if (key == "tempering.pt_burn_in") pt_burn_in = count();
    else throw ConfigError("unknown config key '" + key + "'");
  }

  std::string get(const std::string& key) const {
    if (key == "dataset") return dataset;
    if (key == "output_dir") return output_dir;
    if (key == "prior.pi") return pi ? io::fmt(*pi) : "auto";
    if (key == "prior.pi_file") return pi_file;
    if (key == "prior.c2") return io::fmt(c2);
    if (key == "prior.link") return link == Link::logistic ? "logistic" : "probit";
    if (key == "prior.form") return form == PriorForm::independence ? "independence" : "g_prior";
    if (key == "kernel.kind") return to_string(kernel);
    if (key == "kernel.d") return std::to_string(d);
    if (key == "kernel.graph") return graph_file;
    if (key == "kernel.source") return to_string(graph_source);
    if (key == "kernel.C") return io::fmt(threshold);
    if (key == "kernel.mean_degree") return io::fmt(mean_degree);
    if (key == "run.N") return std::to_string(iterations);
    if (key == "run.B") return std::to_string(burn_in);
    if (key == "run.seed") return std::to_string(seed);
    if (key == "run.record_every") return std::to_string(record_every);
    if (key == "tempering.enabled") return tempering ? "true" : "false";
    if (key == "tempering.K") return std::to_string(chains);
    if (key == "tempering.tau") return io::fmt(tau);
    if (key == "tempering.swap_interval") return std::to_string(swap_interval);
    if (key == "tempering.pt_burn_in") return std::to_string(pt_burn_in);
    throw ConfigError("unknown config key '" + key + "'");
  }

  void validate() const {
    if (dataset.empty()) throw ConfigError("no dataset given");
    if (pi && !(*pi > 0.0 && *pi < 1.0)) throw ConfigError("prior.pi must lie in (0,1)");
    if (pi && !pi_file.empty()) throw ConfigError("prior.pi and prior.pi_file are exclusive");
    if (!(c2 > 0.0)) throw ConfigError("prior.c2 must be positive");
    if (d < 1) throw ConfigError("kernel.d must be at least 1");
    if (kernel == KernelKind::joint_gibbs && d > kMaxJointBlock)
      throw ConfigError("kernel.d = " + std::to_string(d) + " exceeds the joint_gibbs limit " +
                        std::to_string(kMaxJointBlock));
    if (!(threshold >= 0.0 && threshold < 1.0)) throw ConfigError("kernel.C must lie in [0,1)");
    if (!(mean_degree >= 0.0)) throw ConfigError("kernel.mean_degree must be nonnegative");
    RunConfig{iterations, burn_in, seed, record_every}.validate();
    if (tempering) LadderSpec{tau, chains, swap_interval, pt_burn_in}.validate();
  }

  RunConfig run_config() const { return {iterations, burn_in, seed, record_every}; }
  LadderSpec ladder() const { return {tau, chains, swap_interval, pt_burn_in}; }

  std::string serialize() const {
    std::ostringstream out;
    for (const auto& k : keys()) out << k << " = " << get(k) << '\n';
    return out.str();
  }
};

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::vector<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (io::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(row) + ": expected key = value");
    const std::string key = io::trim(line.substr(0, eq));
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw ConfigError("config key '" + key + "' given twice");
    seen.push_back(key);
    c.set(key, line.substr(eq + 1));
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace nbvs
