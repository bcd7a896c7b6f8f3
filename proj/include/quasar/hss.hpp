#pragma once

#include <optional>
#include <vector>

#include "quasar/objectives.hpp"
#include "quasar/trace.hpp"

namespace quasar {

/// Inputs of the binary line search on g(a) = f(a w + (1 - a) z).
struct LineSearchQuery {
  Vec w;
  Vec z;
  double b = 0.0;
  double c = 0.0;
  double eps_tilde = 0.0;
  std::optional<double> guess;

  void validate() const;
};

enum class LineSearchBranch { guess, one, zero, bisection };

struct LineSearchResult {
  double alpha = 1.0;
  LineSearchBranch branch = LineSearchBranch::one;
  std::size_t bisections = 0;
  /// The exit inequality still failed after max_bisect halvings; alpha is the
  /// last bisection point.
  bool capped = false;
  /// Final bisection bracket (both equal alpha on the early exits).
  double lo = 1.0;
  double hi = 1.0;
  /// grad f(alpha w + (1 - alpha) z) when the search already evaluated it.
  std::optional<Vec> gradient;
};

inline constexpr std::size_t kDefaultMaxBisect = 100;

/// Mixing-coefficient search used by the Hinder-Sidford-Sohoni AGD methods.
/// Returns alpha in [0, 1] such that
///   c g(alpha) + alpha (g'(alpha) - alpha p) <= c g(1) + eps_tilde,  p = b |w - z|^2,
/// or one of the early exits (guess accepted, g'(1) <= eps_tilde + p -> 1,
/// c = 0 or g(0) <= g(1) + eps_tilde/c -> 0). Every f and gradient evaluation
/// is charged to `counter`; the AGD loops reuse `gradient` instead of paying twice.
LineSearchResult binary_line_search(const Objective& obj, const LineSearchQuery& q, double L, EvalCounter& counter,
                                    std::size_t max_bisect = kDefaultMaxBisect);

/// theta_k for k >= 0 from theta_k = theta_{k-1}/2 (sqrt(theta_{k-1}^2 + 4) - theta_{k-1}), theta_{-1} = 1.
std::vector<double> hss_theta_sequence(std::size_t count);

struct HssOptions {
  std::size_t max_bisect = kDefaultMaxBisect;
};

/// AGD for (rho, mu)-strongly quasar-convex f. Line search with
/// b = rho mu / 2, c = sqrt(L/mu), eps_tilde = 0; tau_k = 1 - alpha_k,
/// tau'_k = rho sqrt(mu/L), gamma = 1/L, gamma' = 1/sqrt(mu L).
RunTrace hss_agd_strong(const Objective& obj, const Vec& w0, const Vec& z0, double rho, double mu, double L,
                        std::size_t k_max, const RunOptions& opts = {}, const HssOptions& hss = {});

/// AGD for rho-quasar-convex f. Line search with b = 0,
/// c = rho (1/theta_k - 1), eps_tilde = rho eps / 2; tau'_k = 0,
/// gamma = 1/L, z-step gamma'_{k+1} = rho / (L theta_{k+1}).
RunTrace hss_agd_quasar(const Objective& obj, const Vec& w0, const Vec& z0, double rho, double L, double eps,
                        std::size_t k_max, const RunOptions& opts = {}, const HssOptions& hss = {});

}  // namespace quasar
