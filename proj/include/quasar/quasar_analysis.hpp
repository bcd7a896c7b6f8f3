#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "quasar/common.hpp"
#include "quasar/event_clock.hpp"
#include "quasar/objectives.hpp"

namespace quasar {

using PointSet = std::vector<Vec>;

/// (rho, mu, L) bundle for a (strongly) quasar-convex objective.
struct QuasarConstants {
  double rho = 1.0;
  double mu = 0.0;
  double L = 1.0;

  void validate() const;
  /// True when the strongly quasar regime rho in (0, 1] is violated (mu > 0, rho > 1).
  bool outside_strong_regime() const { return mu > 0.0 && rho > 1.0; }
};

/// Result of a sampled certification. Margins are raw (not normalized), so a
/// report can be re-thresholded without re-running the check.
struct CertReport {
  std::string property;
  bool holds = false;
  /// Largest constant consistent with every tested point (NaN if undefined).
  double estimated_constant = 0.0;
  Vec worst_point;
  double worst_margin = 0.0;
  std::size_t points_tested = 0;
  double tolerance = 0.0;
};

nlohmann::json to_json(const CertReport& report);

/// 1e-9 * (1 + |scale|).
double default_tolerance(double margin_scale);

/// `count` points uniformly distributed in the Euclidean ball.
PointSet sample_ball(SeededRng& rng, const Vec& center, double radius, std::size_t count);

// Sampled property checks. Each reports the minimum over `points` of the
// property's margin; `holds` iff that minimum is >= -tol. A negative `tol`
// selects default_tolerance() from the largest |term| seen.

/// margin = <grad f(w), w - w*> - rho (f(w) - f(w*)).
CertReport check_quasar(const Objective& obj, const Vec& w_star, double rho, const PointSet& points,
                        double tol = -1.0);
/// margin = <grad f(w), w - w*>/rho - (f(w) - f(w*)) - mu/2 |w - w*|^2.
CertReport check_strong_quasar(const Objective& obj, const Vec& w_star, double rho, double mu,
                               const PointSet& points, double tol = -1.0);
/// margin = <grad f(w), w - w*> - C_v |w - w*|^2.
CertReport check_one_point_convex(const Objective& obj, const Vec& w_star, double C_v, const PointSet& points,
                                  double tol = -1.0);
/// margin = |grad f(w)|^2 - 2 nu (f(w) - f*).
CertReport check_pl(const Objective& obj, double f_star, double nu, const PointSet& points, double tol = -1.0);
/// margin = f(w) - f(w*) - nu/2 |w - w*|^2.
CertReport check_qg(const Objective& obj, const Vec& w_star, double nu, const PointSet& points, double tol = -1.0);

/// Largest rho consistent with the points: min <grad f, w - w*>/(f - f*),
/// clipped at 0, skipping points with f(w) <= f(w*) + 1e-12 (1 + |f(w*)|).
/// Throws InsufficientSamples if every point is skipped.
double estimate_rho(const Objective& obj, const Vec& w_star, const PointSet& points);

/// h(w, w*) together with the constants of the two paired inequalities
/// <grad f, w - w*> >= C_v h and f - f* <= C_l h.
struct CoherenceWitness {
  std::function<double(const Vec&, const Vec&)> h;
  double C_v = 1.0;
  double C_l = 1.0;
};

/// Checks both coherence inequalities on the points (and h >= 0, h(w*, w*) = 0).
/// The reported margin is the smaller of the two inequality margins.
CertReport check_coherence(const Objective& obj, const Vec& w_star, const CoherenceWitness& witness,
                           const PointSet& points, double tol = -1.0);

// Constant conversions.

/// rho = C_v / C_l.
double coherence_to_quasar(double C_v, double C_l);
/// rho = 2 alpha^2 / L0^2 for an L0-Lipschitz, alpha-increasing link.
double glm_quasar_constant(double alpha, double L0);
/// (rho_hat/theta, 2 C_v (theta - 1)/rho_hat); theta > 1.
std::pair<double, double> one_point_to_strong_quasar(double rho_hat, double C_v, double theta = 2.0);
/// (rho_hat theta, nu (1 - theta)/theta); 0 < theta < 1.
std::pair<double, double> qg_to_strong_quasar(double rho_hat, double nu, double theta = 0.5);
/// nu = alpha^2 lambda_min.
double glm_qg_constant(double alpha, double lambda_min);

/// 1/2 (1/n) sum |x_i|^2: generalized smoothness of the ReLU GLM w.r.t. |w - w*|^2.
double relu_gen_smooth_constant(const GlmProblem& problem);

/// C_R = max over the balls of radius R about +w* and -w* of
/// (1/n) sum ((w + w*).x_i)^2 |x_i|^2. The moment is convex in w, so only the
/// sphere is sampled (antithetic pairs of mc_points/2 directions); the centers
/// themselves are always included.
double phase_retrieval_cr(const GlmProblem& problem, double radius, std::size_t mc_points, SeededRng& rng);

/// max over pairs of |grad f(a) - grad f(b)| / |a - b| (pairs with a == b skipped).
double estimate_smoothness_L(const Objective& obj, const std::vector<std::pair<Vec, Vec>>& pairs);

}  // namespace quasar
