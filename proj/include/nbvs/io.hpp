#pragma once

// CSV persistence. Reals are written with 17 significant digits; every file
// carries a header row.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nbvs/dependence.hpp"
#include "nbvs/diagnostics.hpp"
#include "nbvs/errors.hpp"
#include "nbvs/model.hpp"
#include "nbvs/samplers.hpp"
#include "nbvs/simgen.hpp"

namespace nbvs::io {

namespace fs = std::filesystem;

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(b, e - b + 1);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"')
    out = out.substr(1, out.size() - 2);
  return out;
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

inline double to_double(const std::string& s, const std::string& where) {
  double v;
  if (!parse_double(s, v)) throw ConfigError(where + ": '" + s + "' is not a number");
  return v;
}

inline std::size_t to_index(const std::string& s, const std::string& where) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(where + ": '" + s + "' is not a non-negative integer");
  return static_cast<std::size_t>(std::stoull(s));
}

/// Non-empty lines of a text file.
inline std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    lines.push_back(line);
  }
  return lines;
}

inline std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

// --- dataset ---------------------------------------------------------------

/// Header row optional. With a header the response is the column named "y";
/// without one it is the first column.
inline Dataset read_dataset(const fs::path& path) {
  auto lines = read_lines(path);
  if (lines.empty()) throw ConfigError("'" + path.string() + "' is empty");
  auto first = split(lines[0]);
  bool header = false;
  for (const auto& f : first) {
    double v;
    if (!parse_double(f, v)) { header = true; break; }
  }
  std::size_t ycol = 0;
  std::vector<std::string> labels;
  if (header) {
    bool found = false;
    for (std::size_t c = 0; c < first.size(); ++c)
      if (first[c] == "y") { ycol = c; found = true; break; }
    if (!found) throw ConfigError("'" + path.string() + "' has no column named y");
    for (std::size_t c = 0; c < first.size(); ++c)
      if (c != ycol) labels.push_back(first[c]);
  }
  const std::size_t start = header ? 1 : 0;
  const std::size_t width = first.size();
  if (width < 2) throw ConfigError("'" + path.string() + "' needs y plus covariates");
  const std::size_t n = lines.size() - start;
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width - 1));
  d.y.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto f = split(lines[start + r]);
    const std::string where = path.string() + " row " + std::to_string(start + r + 1);
    if (f.size() != width)
      throw ConfigError(where + ": expected " + std::to_string(width) + " fields");
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      const double v = to_double(f[c], where);
      if (c == ycol) {
        if (v != 0.0 && v != 1.0) throw ConfigError(where + ": y must be 0 or 1");
        d.y[r] = static_cast<std::uint8_t>(v);
      } else {
        d.x(static_cast<Eigen::Index>(r), col++) = v;
      }
    }
  }
  if (header) d.column_labels = std::move(labels);
  else d.column_labels = detail::default_labels(width - 1);
  d.validate();
  return d;
}

inline void write_dataset(const fs::path& path, const Dataset& d) {
  auto out = open_out(path);
  out << "y";
  const auto labels = d.column_labels.empty() ? detail::default_labels(d.p()) : d.column_labels;
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (std::size_t j = 0; j < d.n(); ++j) {
    out << static_cast<int>(d.y[j]);
    for (std::size_t i = 0; i < d.p(); ++i)
      out << ',' << fmt(d.x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)));
    out << '\n';
  }
}

/// Headerless numeric matrix, or one with a header row (labels returned).
inline Matrix read_matrix(const fs::path& path, std::vector<std::string>* labels = nullptr) {
  auto lines = read_lines(path);
  if (lines.empty()) throw ConfigError("'" + path.string() + "' is empty");
  auto first = split(lines[0]);
  bool header = false;
  for (const auto& f : first) {
    double v;
    if (!parse_double(f, v)) { header = true; break; }
  }
  if (header && labels) *labels = first;
  const std::size_t start = header ? 1 : 0;
  const std::size_t n = lines.size() - start, w = first.size();
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(w));
  for (std::size_t r = 0; r < n; ++r) {
    const auto f = split(lines[start + r]);
    const std::string where = path.string() + " row " + std::to_string(start + r + 1);
    if (f.size() != w) throw ConfigError(where + ": ragged row");
    for (std::size_t c = 0; c < w; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = to_double(f[c], where);
  }
  return m;
}

inline void write_matrix(const fs::path& path, const Matrix& m,
                         const std::vector<std::string>& labels = {}) {
  auto out = open_out(path);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (c) out << ',';
    out << (labels.size() == static_cast<std::size_t>(m.cols())
                ? labels[static_cast<std::size_t>(c)]
                : "v" + std::to_string(c));
  }
  out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << fmt(m(r, c));
    out << '\n';
  }
}

// --- truth -----------------------------------------------------------------

inline void write_truth(const fs::path& path, const SimTruth& t) {
  auto out = open_out(path);
  out << "index,beta_true\n";
  for (std::size_t i = 0; i < t.beta_true.size(); ++i)
    out << i << ',' << fmt(t.beta_true[i]) << '\n';
}

/// Indices with nonzero beta_true.
inline IndexList read_truth(const fs::path& path) {
  auto lines = read_lines(path);
  IndexList out;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto f = split(lines[r]);
    const std::string where = path.string() + " row " + std::to_string(r + 1);
    if (f.size() < 2) throw ConfigError(where + ": expected index,beta_true");
    if (to_double(f[1], where) != 0.0) out.push_back(to_index(f[0], where));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- graph -----------------------------------------------------------------

inline void write_edges(const fs::path& path, const NeighbourhoodGraph& g) {
  auto out = open_out(path);
  out << "i,k,weight\n";
  for (const auto& e : g.edges()) out << e.i << ',' << e.k << ',' << fmt(e.weight) << '\n';
}

inline NeighbourhoodGraph read_edges(const fs::path& path, std::size_t p) {
  auto lines = read_lines(path);
  std::vector<Edge> edges;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto f = split(lines[r]);
    const std::string where = path.string() + " row " + std::to_string(r + 1);
    if (f.size() != 3) throw ConfigError(where + ": expected i,k,weight");
    edges.push_back({to_index(f[0], where), to_index(f[1], where), to_double(f[2], where)});
  }
  return NeighbourhoodGraph::from_edges(p, edges);
}

// --- traces ----------------------------------------------------------------

using Meta = std::vector<std::pair<std::string, std::string>>;

inline void write_traces(const fs::path& dir, const TraceSet& t, const Meta& meta) {
  {
    auto out = open_out(dir / "trace_scalar.csv");
    out << "iteration,deviance,model_size\n";
    for (std::size_t m = 0; m < t.size(); ++m)
      out << t.iteration[m] << ',' << fmt(t.deviance[m]) << ',' << t.model_size[m] << '\n';
  }
  {
    auto out = open_out(dir / "trace_gamma.csv");
    out << "iteration,included\n";
    for (std::size_t m = 0; m < t.size(); ++m) {
      out << t.iteration[m] << ',';
      for (std::size_t k = 0; k < t.gamma[m].size(); ++k)
        out << (k ? " " : "") << t.gamma[m][k];
      out << '\n';
    }
  }
  auto out = open_out(dir / "meta.csv");
  out << "key,value\n";
  for (const auto& [k, v] : meta) out << k << ',' << v << '\n';
}

inline std::map<std::string, std::string> read_meta(const fs::path& path) {
  std::map<std::string, std::string> m;
  auto lines = read_lines(path);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto pos = lines[r].find(',');
    if (pos == std::string::npos) continue;
    m[trim(lines[r].substr(0, pos))] = trim(lines[r].substr(pos + 1));
  }
  return m;
}

inline TraceSet read_traces(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("'" + dir.string() + "' is not a directory");
  for (const char* f : {"trace_scalar.csv", "trace_gamma.csv", "meta.csv"})
    if (!fs::exists(dir / f))
      throw ConfigError("'" + dir.string() + "' has no " + f);
  const auto meta = read_meta(dir / "meta.csv");
  TraceSet t;
  auto it = meta.find("p");
  if (it == meta.end()) throw ConfigError("meta.csv lacks p");
  t.p = to_index(it->second, "meta.csv p");
  if ((it = meta.find("cpu_seconds")) != meta.end())
    t.cpu_seconds = to_double(it->second, "meta.csv cpu_seconds");

  const auto scalar = read_lines(dir / "trace_scalar.csv");
  for (std::size_t r = 1; r < scalar.size(); ++r) {
    const auto f = split(scalar[r]);
    const std::string where = "trace_scalar.csv row " + std::to_string(r + 1);
    if (f.size() != 3) throw ConfigError(where + ": expected 3 fields");
    t.iteration.push_back(to_index(f[0], where));
    t.deviance.push_back(to_double(f[1], where));
    t.model_size.push_back(to_index(f[2], where));
  }
  std::ifstream in(dir / "trace_gamma.csv");
  std::string line;
  std::getline(in, line);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto pos = line.find(',');
    const std::string where = "trace_gamma.csv row " + std::to_string(row);
    if (pos == std::string::npos) throw ConfigError(where + ": missing separator");
    IndexList g;
    std::istringstream ss(line.substr(pos + 1));
    std::string tok;
    while (ss >> tok) {
      const auto i = to_index(tok, where);
      if (i >= t.p) throw ConfigError(where + ": index outside [0, p)");
      g.push_back(i);
    }
    std::sort(g.begin(), g.end());
    t.gamma.push_back(std::move(g));
  }
  if (t.gamma.size() != t.deviance.size())
    throw ConfigError("trace_gamma.csv and trace_scalar.csv lengths differ");
  if (t.gamma.empty()) throw ConfigError("'" + dir.string() + "' holds no recorded iterations");
  return t;
}

// --- reports ---------------------------------------------------------------

inline void write_diagnostics(const fs::path& path, const EssReport& r) {
  auto out = open_out(path);
  out << "index,ess,p_hat,visited\n";
  for (std::size_t i = 0; i < r.p_hat.size(); ++i)
    out << i << ',' << fmt(r.ess_per_variable[i]) << ',' << fmt(r.p_hat[i]) << ','
        << static_cast<int>(r.visited[i]) << '\n';
}

inline void write_summary(const fs::path& path, const EssReport& r,
                          const std::optional<FpFn>& counts, double cutoff) {
  auto out = open_out(path);
  out << "ess_star,visited_count,cpu_seconds,efficiency_ratio_per_minute";
  if (counts) out << ",cutoff,fp,fn";
  out << '\n';
  out << fmt(r.ess_star) << ',' << r.visited_count << ',' << fmt(r.cpu_seconds) << ','
      << fmt(r.efficiency_ratio);
  if (counts) out << ',' << fmt(cutoff) << ',' << counts->fp << ',' << counts->fn;
  out << '\n';
}

}  // namespace nbvs::io
