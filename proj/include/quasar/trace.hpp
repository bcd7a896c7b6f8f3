#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quasar/common.hpp"
#include "quasar/objectives.hpp"

namespace quasar {

/// One recorded iteration. f_gap / dist are NaN when the reference is unknown,
/// T_k is NaN for methods without an event clock.
struct TraceRow {
  std::uint64_t k = 0;
  double T = 0.0;
  std::uint64_t grad_calls = 0;
  double time_s = 0.0;
  double f_gap = 0.0;
  double dist = 0.0;
};

/// Iterate snapshot kept when RunOptions::keep_states is set.
struct StateSample {
  std::uint64_t k = 0;
  double T = 0.0;
  Vec w;
  Vec z;
};

struct RunTrace {
  std::string algo;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;
  std::vector<TraceRow> rows;
  std::vector<StateSample> states;
  Vec final_w;
  Vec final_z;
  EvalCounter counter;
};

struct RunOptions {
  std::optional<Vec> w_star;
  /// Defaults to f(w_star) when w_star is given.
  std::optional<double> f_star;
  std::uint64_t record_every = 1;
  bool keep_states = false;
  /// When false, time_s is written as 0 so traces are byte-reproducible.
  bool wall_time = true;
  std::uint64_t seed = 0;
  double divergence_gap = 1e12;
  /// Stop once this many gradient calls have been made (checked per iteration).
  std::optional<std::uint64_t> grad_budget;
  /// Time of the initial state for continuized runs (T_0).
  double t_start = 0.0;
};

/// A run produced a non-finite iterate or an f-gap above the divergence
/// threshold. Carries the trace up to the abort and the last finite state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, RunTrace trace, Vec last_w, Vec last_z)
      : Error(what), trace_(std::move(trace)), last_w_(std::move(last_w)), last_z_(std::move(last_z)) {}
  const RunTrace& trace() const { return trace_; }
  const Vec& last_w() const { return last_w_; }
  const Vec& last_z() const { return last_z_; }

 private:
  RunTrace trace_;
  Vec last_w_;
  Vec last_z_;
};

/// Shared bookkeeping for the optimizers in this library.
class TraceRecorder {
 public:
  TraceRecorder(const Objective& obj, std::string algo, const RunOptions& opts);

  RunTrace& trace() { return trace_; }
  EvalCounter& counter() { return trace_.counter; }
  const RunOptions& options() const { return opts_; }

  /// Records row k if due (or if `force`); checks for divergence.
  void record(std::uint64_t k, double T, const Vec& w, const Vec& z, bool force = false);
  /// Non-finite check for every iteration, independent of recording.
  void check_finite(const Vec& w, const Vec& z, const Vec& prev_w, const Vec& prev_z);
  bool budget_exhausted() const;
  RunTrace finish(const Vec& w, const Vec& z);

 private:
  [[noreturn]] void diverge(const std::string& why, const Vec& w, const Vec& z);

  const Objective& obj_;
  RunOptions opts_;
  RunTrace trace_;
  std::optional<double> f_star_;
  std::chrono::steady_clock::time_point start_;
};

inline constexpr const char* kRunTraceHeader = "algo,seed,k,T_k,grad_calls,time_s,f_gap,dist";

/// Writes the header and every row of every trace.
void write_run_traces_csv(std::ostream& out, const std::vector<RunTrace>& traces);

}  // namespace quasar
