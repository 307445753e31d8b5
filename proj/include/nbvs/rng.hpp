#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace nbvs {

/// Reproducible random stream identified by (seed, stream_id).
///
/// Two engines are carried. The value engine feeds every draw that enters
/// the model (uniforms, normals, Bernoulli decisions). The selection engine
/// feeds index choices (which variable to propose, which neighbourhood
/// members to keep). Kernels that differ only in how they pick sites
/// therefore still consume identical value streams.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id) {
    std::seed_seq values{lo(seed), hi(seed), lo(stream_id), hi(stream_id), 0u};
    std::seed_seq select{lo(seed), hi(seed), lo(stream_id), hi(stream_id), 1u};
    value_engine_.seed(values);
    select_engine_.seed(select);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Uniform on the open interval (0, 1).
  double uniform() { return open_unit(value_engine_()); }

  double normal() { return normal_(value_engine_); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform index in [0, n) drawn from the selection engine.
  std::size_t pick(std::size_t n) {
    auto i = static_cast<std::size_t>(open_unit(select_engine_()) *
                                      static_cast<double>(n));
    return std::min(i, n - 1);
  }

  /// `m` distinct members of `pool`, returned in ascending order.
  /// Selection engine; partial Fisher-Yates.
  std::vector<std::size_t> sample_without_replacement(
      std::vector<std::size_t> pool, std::size_t m) {
    m = std::min(m, pool.size());
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t j = i + pick(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  /// Uniform in (0,1) drawn from the selection engine.
  double select_uniform() { return open_unit(select_engine_()); }

 private:
  static std::uint32_t lo(std::uint64_t v) {
    return static_cast<std::uint32_t>(v & 0xffffffffu);
  }
  static std::uint32_t hi(std::uint64_t v) {
    return static_cast<std::uint32_t>(v >> 32);
  }
  static double open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 value_engine_;
  std::mt19937_64 select_engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace nbvs
