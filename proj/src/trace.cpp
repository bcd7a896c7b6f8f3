#include "quasar/trace.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "quasar/problem_io.hpp"

namespace quasar {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

TraceRecorder::TraceRecorder(const Objective& obj, std::string algo, const RunOptions& opts)
    : obj_(obj), opts_(opts), start_(std::chrono::steady_clock::now()) {
  require(opts_.record_every >= 1, "RunOptions: record_every must be >= 1");
  trace_.algo = std::move(algo);
  trace_.seed = opts_.seed;
  if (opts_.f_star)
    f_star_ = opts_.f_star;
  else if (opts_.w_star)
    f_star_ = obj_.value(*opts_.w_star);
}

void TraceRecorder::record(std::uint64_t k, double T, const Vec& w, const Vec& z, bool force) {
  if (!force && k % opts_.record_every != 0) return;
  TraceRow row;
  row.k = k;
  row.T = T;
  row.grad_calls = trace_.counter.grad_calls;
  row.time_s = opts_.wall_time
                   ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count()
                   : 0.0;
  row.f_gap = f_star_ ? obj_.value(w) - *f_star_ : kNaN;
  row.dist = opts_.w_star ? (w - *opts_.w_star).norm() : kNaN;
  trace_.rows.push_back(row);
  if (opts_.keep_states) trace_.states.push_back({k, T, w, z});
  if (f_star_ && !(row.f_gap <= opts_.divergence_gap))
    diverge("f-gap exceeded the divergence threshold at k=" + std::to_string(k), w, z);
}

void TraceRecorder::check_finite(const Vec& w, const Vec& z, const Vec& prev_w, const Vec& prev_z) {
  if (!w.allFinite() || !z.allFinite()) diverge("non-finite iterate", prev_w, prev_z);
}

bool TraceRecorder::budget_exhausted() const {
  return opts_.grad_budget && trace_.counter.grad_calls >= *opts_.grad_budget;
}

RunTrace TraceRecorder::finish(const Vec& w, const Vec& z) {
  trace_.final_w = w;
  trace_.final_z = z;
  return std::move(trace_);
}

void TraceRecorder::diverge(const std::string& why, const Vec& w, const Vec& z) {
  trace_.final_w = w;
  trace_.final_z = z;
  throw DivergenceError(trace_.algo + ": " + why, trace_, w, z);
}

void write_run_traces_csv(std::ostream& out, const std::vector<RunTrace>& traces) {
  out << kRunTraceHeader << '\n';
  for (const RunTrace& t : traces)
    for (const TraceRow& r : t.rows)
      out << t.algo << ',' << t.seed << ',' << r.k << ',' << format_double(r.T) << ',' << r.grad_calls << ','
          << format_double(r.time_s) << ',' << format_double(r.f_gap) << ',' << format_double(r.dist) << '\n';
}

}  // namespace quasar
