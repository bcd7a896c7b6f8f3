#include "quasar/glmtron.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "quasar/problem_io.hpp"

namespace quasar {

GlmtronParams GlmtronParams::make(double mu, double R2, double kappa_tilde, double tol) {
  require(mu > 0.0 && R2 > 0.0 && kappa_tilde > 0.0, "GlmtronParams: constants must be positive");
  if (kappa_tilde > R2 / mu * (1.0 + tol))
    throw InvalidArgument("GlmtronParams: kappa_tilde must not exceed R2/mu");
  return {mu, R2, kappa_tilde};
}

double GlmtronParams::rate() const { return std::sqrt(mu / (kappa_tilde * R2)); }

GlmtronParams default_glmtron_params(const GlmProblem& problem, const Vec& w0, SeededRng& rng) {
  const GlmConstants c =
      estimate_glm_constants(problem, w0, 10 * static_cast<std::size_t>(problem.n()), rng, MomentSource::dataset);
  return GlmtronParams::make(c.mu, c.R2, c.kappa_tilde);
}

namespace {

class RecoveryRecorder {
 public:
  RecoveryRecorder(const GlmProblem& problem, std::string algo, const RecoveryOptions& opts)
      : problem_(problem), opts_(opts) {
    require(opts_.record_every >= 1, "RecoveryOptions: record_every must be >= 1");
    trace_.algo = std::move(algo);
    trace_.seed = opts_.seed;
    trace_.link_alpha = problem.link.alpha();
  }

  RecoveryTrace& trace() { return trace_; }

  // Returns true when the stop distance has been reached.
  bool record(std::uint64_t k, double T, const Vec& w, const Vec& z, bool force) {
    const double dist = (w - problem_.w_star).norm();
    if (!std::isfinite(dist) || dist > opts_.divergence_dist) {
      trace_.rows.push_back({k, T, trace_.pg_calls, dist});
      throw RecoveryDivergenceError(trace_.algo + ": iterate diverged at k=" + std::to_string(k), trace_);
    }
    const bool reached = opts_.stop_dist && dist <= *opts_.stop_dist;
    if (force || reached || k % opts_.record_every == 0) {
      trace_.rows.push_back({k, T, trace_.pg_calls, dist});
      if (opts_.keep_states) trace_.states.push_back({k, T, w, z});
    }
    return reached;
  }

  RecoveryTrace finish(const Vec& w, const Vec& z) {
    trace_.final_w = w;
    trace_.final_z = z;
    return std::move(trace_);
  }

 private:
  const GlmProblem& problem_;
  RecoveryOptions opts_;
  RecoveryTrace trace_;
};

Vec counted_pseudo_gradient(const GlmProblem& problem, const Vec& w, SeededRng& rng, RecoveryTrace& trace) {
  ++trace.pg_calls;
  return pseudo_gradient(problem, w, static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(problem.n()))));
}

}  // namespace

RecoveryTrace glmtron_run(const GlmProblem& problem, const Vec& w0, double step, std::size_t k_max, SeededRng& rng,
                          const RecoveryOptions& opts) {
  problem.validate();
  require(step > 0.0, "glmtron_run: step must be positive");
  require(w0.size() == problem.d(), "glmtron_run: dimension mismatch");
  RecoveryRecorder rec(problem, "glmtron", opts);
  rec.trace().params = {{"step", step}};
  Vec w = w0;
  bool done = rec.record(0, std::nan(""), w, w, true);
  for (std::size_t k = 0; k < k_max && !done; ++k) {
    w -= step * counted_pseudo_gradient(problem, w, rng, rec.trace());
    done = rec.record(k + 1, std::nan(""), w, w, k + 1 == k_max);
  }
  return rec.finish(w, w);
}

StepParams accel_glmtron_step_params(const GlmtronParams& p, double dT) {
  require(dT >= 0.0, "accel_glmtron_step_params: dT must be nonnegative");
  const double x = -2.0 * p.rate() * dT;
  const double e = std::exp(x);
  const double one_minus_e = -std::expm1(x);
  return {0.5 * one_minus_e, one_minus_e / (1.0 + e), 1.0 / p.R2, 1.0 / std::sqrt(p.mu * p.kappa_tilde * p.R2)};
}

ParamSchedule accel_glmtron_schedule(const GlmtronParams& p) {
  ParamSchedule s;
  s.name = "accel-glmtron";
  s.mixing = [p](double t_k, double t_next) {
    const StepParams sp = accel_glmtron_step_params(p, t_next - t_k);
    return Mixing{sp.tau, sp.tau_prime};
  };
  s.steps = [p](double) {
    const StepParams sp = accel_glmtron_step_params(p, 0.0);
    return JumpSteps{sp.gamma, sp.gamma_prime};
  };
  s.params = {{"mu", p.mu}, {"R2", p.R2}, {"kappa_tilde", p.kappa_tilde}};
  return s;
}

RecoveryTrace accel_glmtron_run(const GlmProblem& problem, const Vec& w0, const Vec& z0, const GlmtronParams& p,
                                const JumpSchedule& schedule, std::size_t k_max, SeededRng& rng,
                                const RecoveryOptions& opts) {
  problem.validate();
  require(w0.size() == problem.d() && z0.size() == problem.d(), "accel_glmtron_run: dimension mismatch");
  require(schedule.size() >= k_max, "accel_glmtron_run: schedule shorter than k_max");
  const ParamSchedule sched = accel_glmtron_schedule(p);
  RecoveryRecorder rec(problem, sched.name, opts);
  rec.trace().params = sched.params;
  Vec w = w0;
  Vec z = z0;
  double t_prev = 0.0;
  bool done = rec.record(0, t_prev, w, z, true);
  for (std::size_t k = 0; k < k_max && !done; ++k) {
    const double t_next = schedule.time(k + 1);
    const Mixing mix = sched.mixing(t_prev, t_next);
    const JumpSteps jump = sched.steps(t_next);
    const Vec v = w + mix.tau * (z - w);
    const Vec g = counted_pseudo_gradient(problem, v, rng, rec.trace());
    z += mix.tau_prime * (v - z) - jump.gamma_prime * g;
    w = v - jump.gamma * g;
    t_prev = t_next;
    done = rec.record(k + 1, t_prev, w, z, k + 1 == k_max);
  }
  return rec.finish(w, z);
}

std::optional<std::uint64_t> iterations_to_reach(const RecoveryTrace& trace, double threshold) {
  for (const RecoveryRow& r : trace.rows)
    if (r.dist <= threshold) return r.k;
  return std::nullopt;
}

std::vector<double> glmtron_potential(const std::vector<StateSample>& states, const GlmtronParams& p,
                                      const Vec& w_star, const Mat& H) {
  Eigen::LLT<Mat> llt(H);
  if (llt.info() != Eigen::Success) throw RankDeficient("glmtron_potential: H is not positive definite");
  const double rate = p.rate();
  std::vector<double> phi;
  phi.reserve(states.size());
  for (const StateSample& s : states) {
    const Vec ez = s.z - w_star;
    const double hz = ez.dot(llt.solve(ez));
    phi.push_back(std::exp(rate * s.T) * (0.5 * (s.w - w_star).squaredNorm() + 0.5 * p.mu * hz));
  }
  return phi;
}

void write_recovery_traces_csv(std::ostream& out, const std::vector<RecoveryTrace>& traces) {
  out << kRecoveryTraceHeader << '\n';
  for (const RecoveryTrace& t : traces)
    for (const RecoveryRow& r : t.rows)
      out << t.algo << ',' << t.seed << ',' << r.k << ',' << format_double(r.T) << ',' << r.pg_calls << ','
          << format_double(r.dist) << '\n';
}

std::vector<double> decade_grid(int q_lo, int q_hi) {
  require(q_lo <= q_hi, "decade_grid: empty exponent range");
  std::vector<double> v;
  for (int q = q_lo; q <= q_hi; ++q) {
    const double base = std::pow(10.0, q);
    v.push_back(base);
    v.push_back(5.0 * base);
  }
  return v;
}

double median(std::vector<double> values) {
  require(!values.empty(), "median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

StepTuning tune_glmtron_step(const GlmProblem& problem, const Vec& w0, const std::vector<double>& candidates,
                             std::size_t runs, std::size_t k_max, double threshold, std::uint64_t master_seed) {
  require(!candidates.empty() && runs >= 1, "tune_glmtron_step: need candidates and runs >= 1");
  StepTuning out;
  double best_score = std::numeric_limits<double>::infinity();
  const double miss = static_cast<double>(k_max) + 1.0;
  std::vector<double> sorted(candidates);
  std::sort(sorted.begin(), sorted.end());
  RecoveryOptions opts;
  opts.stop_dist = threshold;
  opts.record_every = k_max + 1;
  for (double step : sorted) {
    std::vector<double> iters;
    for (std::size_t r = 0; r < runs; ++r) {
      SeededRng rng(master_seed, derive_stream(fnv1a64("glmtron"), r));
      try {
        const RecoveryTrace t = glmtron_run(problem, w0, step, k_max, rng, opts);
        const auto hit = iterations_to_reach(t, threshold);
        iters.push_back(hit ? static_cast<double>(*hit) : miss);
      } catch (const RecoveryDivergenceError&) {
        iters.push_back(miss);
      }
    }
    const double score = median(iters);
    out.table.emplace_back(step, score);
    if (score < best_score) {
      best_score = score;
      out.best_step = step;
    }
  }
  return out;
}

}  // namespace quasar
