#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quasar/continuized.hpp"
#include "quasar/event_clock.hpp"
#include "quasar/objectives.hpp"

namespace quasar {

/// Moment constants of the accelerated GLMtron: H(w) >= mu I,
/// E[psi^2 |x|^2 x x^T] <= R2 H(w), E[psi^2 |x|^2_{H^-1} x x^T] <= kappa_tilde H(w).
struct GlmtronParams {
  double mu = 1.0;
  double R2 = 1.0;
  double kappa_tilde = 1.0;

  /// Throws unless all are positive and kappa_tilde <= R2/mu (relative slack `tol`).
  static GlmtronParams make(double mu, double R2, double kappa_tilde, double tol = 1e-8);
  /// sqrt(mu / (kappa_tilde R2)): the rate of the continuous-time bound.
  double rate() const;
};

/// Constants from estimate_glm_constants at w0 with 10 n dataset draws.
GlmtronParams default_glmtron_params(const GlmProblem& problem, const Vec& w0, SeededRng& rng);

struct RecoveryRow {
  std::uint64_t k = 0;
  double T = 0.0;
  std::uint64_t pg_calls = 0;
  double dist = 0.0;
};

struct RecoveryTrace {
  std::string algo;
  std::uint64_t seed = 0;
  double link_alpha = 0.0;
  std::map<std::string, double> params;
  std::vector<RecoveryRow> rows;
  std::vector<StateSample> states;
  Vec final_w;
  Vec final_z;
  std::uint64_t pg_calls = 0;
};

struct RecoveryOptions {
  std::uint64_t record_every = 1;
  bool keep_states = false;
  /// Stop early once |w - w*| <= stop_dist.
  std::optional<double> stop_dist;
  double divergence_dist = 1e12;
  std::uint64_t seed = 0;
};

class RecoveryDivergenceError : public Error {
 public:
  RecoveryDivergenceError(const std::string& what, RecoveryTrace trace) : Error(what), trace_(std::move(trace)) {}
  const RecoveryTrace& trace() const { return trace_; }

 private:
  RecoveryTrace trace_;
};

/// Stochastic GLMtron: w <- w - step g(w; xi), xi uniform over rows with replacement.
RecoveryTrace glmtron_run(const GlmProblem& problem, const Vec& w0, double step, std::size_t k_max, SeededRng& rng,
                          const RecoveryOptions& opts = {});

/// With e = exp(-2 rate dT): tau = (1-e)/2, tau' = (1-e)/(1+e),
/// gamma = 1/R2, gamma' = 1/sqrt(mu kappa_tilde R2).
StepParams accel_glmtron_step_params(const GlmtronParams& p, double dT);
ParamSchedule accel_glmtron_schedule(const GlmtronParams& p);

/// Continuized GLMtron: the discrete continuized iteration with grad f
/// replaced by one pseudo-gradient per step.
RecoveryTrace accel_glmtron_run(const GlmProblem& problem, const Vec& w0, const Vec& z0, const GlmtronParams& p,
                                const JumpSchedule& schedule, std::size_t k_max, SeededRng& rng,
                                const RecoveryOptions& opts = {});

/// First recorded iteration with dist <= threshold.
std::optional<std::uint64_t> iterations_to_reach(const RecoveryTrace& trace, double threshold);

/// phi_k = exp(rate T_k) (1/2 |w_k - w*|^2 + mu/2 (z_k - w*)^T H^{-1} (z_k - w*))
/// with H held fixed (typically H(w_0)).
std::vector<double> glmtron_potential(const std::vector<StateSample>& states, const GlmtronParams& p,
                                      const Vec& w_star, const Mat& H);

inline constexpr const char* kRecoveryTraceHeader = "algo,seed,k,T_k,pg_calls,dist";
void write_recovery_traces_csv(std::ostream& out, const std::vector<RecoveryTrace>& traces);

struct StepTuning {
  double best_step = 0.0;
  /// candidate -> median iterations to reach the threshold (k_max + 1 when not reached).
  std::vector<std::pair<double, double>> table;
};

/// Grid search of the GLMtron step over `candidates`, scored by the median over
/// `runs` of iterations needed to reach |w - w*| <= threshold. Ties go to the
/// smaller step.
StepTuning tune_glmtron_step(const GlmProblem& problem, const Vec& w0, const std::vector<double>& candidates,
                             std::size_t runs, std::size_t k_max, double threshold, std::uint64_t master_seed);

/// {10^q, 5 10^q} for q in [q_lo, q_hi], ascending.
std::vector<double> decade_grid(int q_lo, int q_hi);

double median(std::vector<double> values);

}  // namespace quasar
