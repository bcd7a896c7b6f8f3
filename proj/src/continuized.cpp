#include "quasar/continuized.hpp"

#include <cmath>
#include <algorithm>
#include <limits>

namespace quasar {

StepParams ParamSchedule::at(double t_k, double t_next) const {
  const Mixing m = mixing(t_k, t_next);
  const JumpSteps s = steps(t_k);
  return {m.tau, m.tau_prime, s.gamma, s.gamma_prime};
}

StepParams quasar_step_params(double rho, double L, double T_k, double T_next) {
  require(rho > 0.0 && L > 0.0, "quasar_step_params: rho and L must be positive");
  require(T_k >= 0.0, "quasar_step_params: T_k must be nonnegative");
  require(T_k < T_next, "quasar_step_params: need T_k < T_{k+1}");
  const double tau = 1.0 - std::pow(T_k / T_next, 2.0 / rho);
  return {tau, 0.0, 1.0 / L, rho * T_k / (2.0 * L)};
}

StepParams strong_quasar_step_params(double rho, double mu, double L, double dT) {
  require(rho > 0.0 && mu > 0.0 && L > 0.0, "strong_quasar_step_params: rho, mu, L must be positive");
  require(dT >= 0.0, "strong_quasar_step_params: dT must be nonnegative");
  const double e = std::exp(-(1.0 + rho) * std::sqrt(mu / L) * dT);
  // 1 - e via expm1 keeps tau accurate for tiny increments.
  const double one_minus_e = -std::expm1(-(1.0 + rho) * std::sqrt(mu / L) * dT);
  return {one_minus_e / (1.0 + rho), rho * one_minus_e / (rho + e), 1.0 / L, 1.0 / std::sqrt(mu * L)};
}

ParamSchedule quasar_schedule(double rho, double L) {
  require(rho > 0.0 && L > 0.0, "quasar_schedule: rho and L must be positive");
  ParamSchedule s;
  s.name = "continuized-quasar";
  s.mixing = [rho, L](double t_k, double t_next) {
    const StepParams p = quasar_step_params(rho, L, t_k, t_next);
    return Mixing{p.tau, p.tau_prime};
  };
  s.steps = [rho, L](double t) { return JumpSteps{1.0 / L, rho * t / (2.0 * L)}; };
  s.params = {{"rho", rho}, {"L", L}};
  return s;
}

ParamSchedule strong_quasar_schedule(double rho, double mu, double L) {
  require(rho > 0.0 && mu > 0.0 && L > 0.0, "strong_quasar_schedule: rho, mu, L must be positive");
  ParamSchedule s;
  s.name = "continuized-strong";
  s.mixing = [rho, mu, L](double t_k, double t_next) {
    const StepParams p = strong_quasar_step_params(rho, mu, L, t_next - t_k);
    return Mixing{p.tau, p.tau_prime};
  };
  s.steps = [mu, L](double) { return JumpSteps{1.0 / L, 1.0 / std::sqrt(mu * L)}; };
  s.params = {{"rho", rho}, {"mu", mu}, {"L", L}};
  return s;
}

ContinuousParams quasar_continuous_params(double rho, double L) {
  require(rho > 0.0 && L > 0.0, "quasar_continuous_params: rho and L must be positive");
  return {[rho](double t) { return 2.0 / (rho * t); }, [](double) { return 0.0; },
          [L](double) { return 1.0 / L; }, [rho, L](double t) { return rho * t / (2.0 * L); }};
}

ContinuousParams strong_quasar_continuous_params(double rho, double mu, double L) {
  require(rho > 0.0 && mu > 0.0 && L > 0.0, "strong_quasar_continuous_params: rho, mu, L must be positive");
  const double s = std::sqrt(mu / L);
  const double gp = 1.0 / std::sqrt(mu * L);
  return {[s](double) { return s; }, [s, rho](double) { return rho * s; }, [L](double) { return 1.0 / L; },
          [gp](double) { return gp; }};
}

TripleState continuized_step(const Objective& obj, const Vec& w, const Vec& z, const Mixing& mix,
                             const JumpSteps& jump, EvalCounter& counter) {
  TripleState next;
  next.v = w + mix.tau * (z - w);
  const Vec g = obj.gradient(next.v, counter);
  next.w = next.v - jump.gamma * g;
  next.z = z + mix.tau_prime * (next.v - z) - jump.gamma_prime * g;
  return next;
}

RunTrace continuized_run(const Objective& obj, const Vec& w0, const Vec& z0, const JumpSchedule& schedule,
                         const ParamSchedule& params, std::size_t k_max, const RunOptions& opts) {
  require(w0.size() == obj.dim() && z0.size() == obj.dim(), "continuized_run: dimension mismatch");
  require(schedule.size() >= k_max, "continuized_run: schedule shorter than k_max");
  require(k_max == 0 || schedule.time(1) > opts.t_start, "continuized_run: first jump must follow t_start");

  TraceRecorder rec(obj, params.name, opts);
  rec.trace().params = params.params;
  Vec w = w0;
  Vec z = z0;
  double t_prev = opts.t_start;
  rec.record(0, t_prev, w, z, true);
  for (std::size_t k = 0; k < k_max; ++k) {
    const double t_next = schedule.time(k + 1);
    TripleState s = continuized_step(obj, w, z, params.mixing(t_prev, t_next), params.steps(t_next), rec.counter());
    rec.check_finite(s.w, s.z, w, z);
    w = std::move(s.w);
    z = std::move(s.z);
    t_prev = t_next;
    const bool stop = rec.budget_exhausted();
    rec.record(k + 1, t_prev, w, z, stop || k + 1 == k_max);
    if (stop) break;
  }
  return rec.finish(w, z);
}

RunTrace gd_run(const Objective& obj, const Vec& w0, double step, std::size_t k_max, const RunOptions& opts) {
  require(w0.size() == obj.dim(), "gd_run: dimension mismatch");
  require(step >= 0.0, "gd_run: step must be nonnegative");
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  TraceRecorder rec(obj, "gd", opts);
  rec.trace().params = {{"step", step}};
  Vec w = w0;
  rec.record(0, kNaN, w, w, true);
  for (std::size_t k = 0; k < k_max; ++k) {
    Vec next = w - step * obj.gradient(w, rec.counter());
    rec.check_finite(next, next, w, w);
    w = std::move(next);
    const bool stop = rec.budget_exhausted();
    rec.record(k + 1, kNaN, w, w, stop || k + 1 == k_max);
    if (stop) break;
  }
  return rec.finish(w, w);
}

std::vector<StateSample> simulate_continuized_euler(const Objective& obj, const Vec& w0, const Vec& z0,
                                                    const JumpSchedule& schedule, const ContinuousParams& params,
                                                    double dt, std::size_t jumps, double t_start) {
  require(dt > 0.0, "simulate_continuized_euler: dt must be positive");
  require(schedule.size() >= jumps, "simulate_continuized_euler: schedule shorter than requested jumps");
  require(jumps == 0 || schedule.time(1) > t_start, "simulate_continuized_euler: first jump must follow t_start");
  std::vector<StateSample> out;
  out.reserve(jumps);
  Vec w = w0;
  Vec z = z0;
  Vec diff(w0.size());
  double t0 = t_start;
  for (std::size_t k = 1; k <= jumps; ++k) {
    const double t1 = schedule.time(k);
    const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil((t1 - t0) / dt)));
    const double h = (t1 - t0) / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s) {
      const double t = t0 + static_cast<double>(s) * h;
      diff.noalias() = z - w;
      w += (h * params.eta(t)) * diff;
      z -= (h * params.eta_prime(t)) * diff;
    }
    const Vec g = obj.gradient(w);
    w -= params.gamma(t1) * g;
    z -= params.gamma_prime(t1) * g;
    out.push_back({k, t1, w, z});
    t0 = t1;
  }
  return out;
}

double discretization_gap(const Objective& obj, const Vec& w0, const Vec& z0, const JumpSchedule& schedule,
                          double rho, double mu, double L, double dt, std::size_t jumps) {
  RunOptions opts;
  opts.keep_states = true;
  opts.wall_time = false;
  const RunTrace discrete = continuized_run(obj, w0, z0, schedule, strong_quasar_schedule(rho, mu, L), jumps, opts);
  const std::vector<StateSample> euler = simulate_continuized_euler(
      obj, w0, z0, schedule, strong_quasar_continuous_params(rho, mu, L), dt, jumps);
  double worst = 0.0;
  for (std::size_t k = 1; k <= jumps; ++k) {
    const StateSample& a = discrete.states[k];
    const StateSample& b = euler[k - 1];
    const double num = std::sqrt((a.w - b.w).squaredNorm() + (a.z - b.z).squaredNorm());
    const double den = std::sqrt(a.w.squaredNorm() + a.z.squaredNorm());
    worst = std::max(worst, den > 0.0 ? num / den : num);
  }
  return worst;
}

std::vector<double> lyapunov_monitor_strong(const Objective& obj, const std::vector<StateSample>& states, double rho,
                                            double mu, double L, const Vec& w_star, double f_star) {
  require(rho > 0.0 && mu > 0.0 && L > 0.0, "lyapunov_monitor_strong: rho, mu, L must be positive");
  const double rate = rho * std::sqrt(mu / L);
  std::vector<double> phi;
  phi.reserve(states.size());
  for (const StateSample& s : states) {
    const double A = std::exp(rate * s.T);
    phi.push_back(A * (obj.value(s.w) - f_star) + 0.5 * mu * A * (s.z - w_star).squaredNorm());
  }
  return phi;
}

}  // namespace quasar
