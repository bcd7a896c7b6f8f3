#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "quasar/common.hpp"

namespace quasar {

/// SplitMix64 finalizer. Used to whiten seeds and derive stream ids.
std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a over bytes; the stable hash used for config ids.
std::uint64_t fnv1a64(std::string_view bytes);

/// stream_id = splitmix64(config_id ^ splitmix64(run_index + 1)).
std::uint64_t derive_stream(std::uint64_t config_id, std::uint64_t run_index);

/// Deterministic random source owned by one run.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. All distributions are implemented here rather than through
/// <random> distribution objects, whose algorithms are implementation-defined.
class SeededRng {
 public:
  SeededRng(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on (0, 1]; 53 random mantissa bits, zero excluded.
  double uniform_open0();

  /// Uniform integer in [0, n) without modulo bias.
  std::size_t index(std::size_t n);

  /// Standard normal via Box-Muller (pairs cached).
  double normal();

  Vec normal_vector(Eigen::Index d);

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Inverse CDF of Exponential(1): -ln(1 - u) for u in [0, 1).
double exponential_inverse_cdf(double u);

/// One unit-rate Poisson increment, -ln(u) with u uniform on (0, 1].
double sample_increment(SeededRng& rng);

/// The jump times T_1 < T_2 < ... < T_K of a unit-rate Poisson process.
/// T_0 = 0 is implicit and available through time(0).
class JumpSchedule {
 public:
  JumpSchedule() = default;
  /// Validates strict monotonicity and positivity.
  explicit JumpSchedule(std::vector<double> times);

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }

  /// T_k for k in [0, size()]; time(0) == 0.
  double time(std::size_t k) const { return k == 0 ? 0.0 : times_.at(k - 1); }

  std::span<const double> times() const { return times_; }

  /// Returns a copy with every time shifted by `offset`.
  JumpSchedule shifted(double offset) const;

 private:
  std::vector<double> times_;
};

/// Draws k_max increments and accumulates them. Throws InvalidArgument if
/// k_max == 0.
JumpSchedule build_schedule(SeededRng& rng, std::size_t k_max);

}  // namespace quasar
