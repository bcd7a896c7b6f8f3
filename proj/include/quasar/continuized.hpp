#pragma once

#include <functional>
#include <string>
#include <vector>

#include "quasar/event_clock.hpp"
#include "quasar/objectives.hpp"
#include "quasar/trace.hpp"

namespace quasar {

/// Parameters of one discrete step: the mixing pair (tau, tau') for the
/// interval [T_k, T_{k+1}) and the jump step sizes (gamma, gamma') at T_k.
struct StepParams {
  double tau = 0.0;
  double tau_prime = 0.0;
  double gamma = 0.0;
  double gamma_prime = 0.0;
};

struct Mixing {
  double tau = 0.0;
  double tau_prime = 0.0;
};

struct JumpSteps {
  double gamma = 0.0;
  double gamma_prime = 0.0;
};

/// Discrete schedule of a continuized method. `mixing(T_k, T_{k+1})` gives the
/// exact ODE flow between jumps; `steps(t)` the jump sizes at time t.
struct ParamSchedule {
  std::string name;
  std::function<Mixing(double, double)> mixing;
  std::function<JumpSteps(double)> steps;
  std::map<std::string, double> params;

  /// (mixing(t_k, t_next), steps(t_k)).
  StepParams at(double t_k, double t_next) const;
};

/// tau = 1 - (T_k/T_{k+1})^{2/rho}, tau' = 0, gamma = 1/L, gamma' = rho T_k / (2L).
/// T_k = 0 is allowed and gives tau = 1. Throws if T_k >= T_{k+1} or T_k < 0.
StepParams quasar_step_params(double rho, double L, double T_k, double T_next);

/// With e = exp(-(1+rho) sqrt(mu/L) dT): tau = (1-e)/(1+rho),
/// tau' = rho(1-e)/(rho+e), gamma = 1/L, gamma' = 1/sqrt(mu L).
StepParams strong_quasar_step_params(double rho, double mu, double L, double dT);

ParamSchedule quasar_schedule(double rho, double L);
ParamSchedule strong_quasar_schedule(double rho, double mu, double L);

/// Continuous-time coefficients of the jump-diffusion
///   dw = eta (z - w) dt - gamma grad f(w) dN,  dz = eta' (w - z) dt - gamma' grad f(w) dN.
struct ContinuousParams {
  std::function<double(double)> eta;
  std::function<double(double)> eta_prime;
  std::function<double(double)> gamma;
  std::function<double(double)> gamma_prime;
};

/// eta = 2/(rho t), eta' = 0, gamma = 1/L, gamma' = rho t/(2L).
ContinuousParams quasar_continuous_params(double rho, double L);
/// eta = sqrt(mu/L), eta' = rho sqrt(mu/L), gamma = 1/L, gamma' = 1/sqrt(mu L).
ContinuousParams strong_quasar_continuous_params(double rho, double mu, double L);

struct TripleState {
  Vec w;
  Vec z;
  Vec v;
};

/// Discrete continuized iteration, one gradient call per step:
///   v_k     = w_k + tau_k (z_k - w_k)
///   w_{k+1} = v_k - gamma_{k+1} grad f(v_k)
///   z_{k+1} = z_k + tau'_k (v_k - z_k) - gamma'_{k+1} grad f(v_k)
/// where (tau_k, tau'_k) = mixing(T_k, T_{k+1}) and gamma_{k+1} = steps(T_{k+1}).
/// T_0 = opts.t_start. Throws DivergenceError on blow-up.
RunTrace continuized_run(const Objective& obj, const Vec& w0, const Vec& z0, const JumpSchedule& schedule,
                         const ParamSchedule& params, std::size_t k_max, const RunOptions& opts = {});

/// One mixing + jump step. Exposed for tests and bindings.
TripleState continuized_step(const Objective& obj, const Vec& w, const Vec& z, const Mixing& mix,
                             const JumpSteps& jump, EvalCounter& counter);

/// w_{k+1} = w_k - step grad f(w_k).
RunTrace gd_run(const Objective& obj, const Vec& w0, double step, std::size_t k_max, const RunOptions& opts = {});

/// Explicit-Euler simulation of the continuized process. Between jumps the
/// linear ODE is integrated with substeps of at most `dt` (each interval is
/// split evenly so jump times are hit exactly); at each T_k the gradient jump
/// is applied. Returns the post-jump state (w_{T_k}, z_{T_k}) for k = 1..jumps.
std::vector<StateSample> simulate_continuized_euler(const Objective& obj, const Vec& w0, const Vec& z0,
                                                    const JumpSchedule& schedule, const ContinuousParams& params,
                                                    double dt, std::size_t jumps, double t_start = 0.0);

/// Largest relative gap, over jumps k = 1..jumps, between the discrete
/// strong-quasar iterates and the Euler simulation at step dt:
///   max_k |(w_k, z_k) - (w(T_k), z(T_k))| / |(w_k, z_k)|.
double discretization_gap(const Objective& obj, const Vec& w0, const Vec& z0, const JumpSchedule& schedule,
                          double rho, double mu, double L, double dt, std::size_t jumps);

/// phi_k = A_k (f(w_k) - f*) + (B_k/2) |z_k - w*|^2 with
/// A_k = exp(rho sqrt(mu/L) T_k), B_k = mu A_k.
std::vector<double> lyapunov_monitor_strong(const Objective& obj, const std::vector<StateSample>& states, double rho,
                                            double mu, double L, const Vec& w_star, double f_star);

}  // namespace quasar
