#include "quasar/hss.hpp"

#include <cmath>
#include <optional>

namespace quasar {

void LineSearchQuery::validate() const {
  require(w.size() == z.size(), "LineSearchQuery: w and z differ in dimension");
  require(b >= 0.0 && c >= 0.0 && eps_tilde >= 0.0, "LineSearchQuery: b, c, eps_tilde must be nonnegative");
  require(!guess || (*guess >= 0.0 && *guess <= 1.0), "LineSearchQuery: guess must lie in [0, 1]");
}

namespace {

// g(a) = f(a w + (1-a) z) and g'(a) = <grad f(a w + (1-a) z), w - z>, with
// lazily cached values at the fixed abscissae 0, 1 and tau.
class RestrictedLine {
 public:
  RestrictedLine(const Objective& obj, const Vec& w, const Vec& z, EvalCounter& counter)
      : obj_(obj), z_(z), dir_(w - z), counter_(counter) {}

  double value(double a) { return obj_.value(point(a), counter_); }
  double slope(double a) {
    last_grad_ = obj_.gradient(point(a), counter_);
    last_grad_at_ = a;
    return last_grad_->dot(dir_);
  }
  // Gradient at a if the last slope() call was there.
  std::optional<Vec> gradient_at(double a) const {
    if (last_grad_ && last_grad_at_ == a) return last_grad_;
    return std::nullopt;
  }
  double dir_sq() const { return dir_.squaredNorm(); }

  double value_cached(double a, std::optional<double>& slot) {
    if (!slot) slot = value(a);
    return *slot;
  }

 private:
  Vec point(double a) const { return z_ + a * dir_; }

  const Objective& obj_;
  std::optional<Vec> last_grad_;
  double last_grad_at_ = 0.0;
  const Vec& z_;
  Vec dir_;
  EvalCounter& counter_;
};

}  // namespace

LineSearchResult binary_line_search(const Objective& obj, const LineSearchQuery& q, double L, EvalCounter& counter,
                                    std::size_t max_bisect) {
  q.validate();
  require(L > 0.0, "binary_line_search: L must be positive");
  RestrictedLine g(obj, q.w, q.z, counter);
  const double dist_sq = g.dir_sq();
  const double p = q.b * dist_sq;
  std::optional<double> g_one;
  std::optional<double> g_tau;

  auto exit_holds = [&](double a, double g_a) {
    return q.c * g_a + a * (g.slope(a) - a * p) <= q.c * g.value_cached(1.0, g_one) + q.eps_tilde;
  };

  LineSearchResult r;
  if (q.guess && exit_holds(*q.guess, g.value(*q.guess))) {
    r.alpha = r.lo = r.hi = *q.guess;
    r.branch = LineSearchBranch::guess;
    r.gradient = g.gradient_at(r.alpha);
    return r;
  }
  if (g.slope(1.0) <= q.eps_tilde + p) {
    r.alpha = r.lo = r.hi = 1.0;
    r.branch = LineSearchBranch::one;
    r.gradient = g.gradient_at(1.0);
    return r;
  }
  if (q.c == 0.0 || g.value(0.0) <= g.value_cached(1.0, g_one) + q.eps_tilde / q.c) {
    r.alpha = r.lo = r.hi = 0.0;
    r.branch = LineSearchBranch::zero;
    return r;
  }

  r.branch = LineSearchBranch::bisection;
  // dist_sq > 0 here: otherwise g'(1) = 0 <= eps_tilde + p returned above.
  // Clamped at 0 so alpha stays in [0, 1] when b >= L.
  const double tau = std::max(0.0, 1.0 - (q.eps_tilde + p) / (L * dist_sq));
  double lo = 0.0;
  double hi = tau;
  double alpha = tau;
  double g_alpha = g.value_cached(tau, g_tau);
  while (!exit_holds(alpha, g_alpha)) {
    if (r.bisections == max_bisect) {
      r.capped = true;
      break;
    }
    alpha = 0.5 * (lo + hi);
    g_alpha = g.value(alpha);
    if (g_alpha <= g.value_cached(tau, g_tau))
      hi = alpha;
    else
      lo = alpha;
    ++r.bisections;
  }
  r.alpha = alpha;
  r.lo = lo;
  r.hi = hi;
  r.gradient = g.gradient_at(alpha);
  return r;
}

std::vector<double> hss_theta_sequence(std::size_t count) {
  std::vector<double> theta;
  theta.reserve(count);
  double prev = 1.0;
  for (std::size_t k = 0; k < count; ++k) {
    prev = 0.5 * prev * (std::sqrt(prev * prev + 4.0) - prev);
    theta.push_back(prev);
  }
  return theta;
}

namespace {

struct HssStep {
  double b;
  double c;
  double eps_tilde;
  double tau_prime;
  double gamma;
  double gamma_prime;
};

template <typename StepFor>
RunTrace run_hss(const char* name, const Objective& obj, const Vec& w0, const Vec& z0, double L, std::size_t k_max,
                 const RunOptions& opts, const HssOptions& hss, StepFor&& step_for) {
  require(w0.size() == obj.dim() && z0.size() == obj.dim(), std::string(name) + ": dimension mismatch");
  TraceRecorder rec(obj, name, opts);
  Vec w = w0;
  Vec z = z0;
  std::size_t bisections = 0;
  std::size_t capped = 0;
  rec.record(0, std::nan(""), w, z, true);
  for (std::size_t k = 0; k < k_max; ++k) {
    const HssStep s = step_for(k);
    LineSearchQuery q{w, z, s.b, s.c, s.eps_tilde, std::nullopt};
    const LineSearchResult ls = binary_line_search(obj, q, L, rec.counter(), hss.max_bisect);
    bisections += ls.bisections;
    capped += ls.capped ? 1 : 0;
    // v = w + tau (z - w) with tau = 1 - alpha, written as the line-search point
    // so the gradient the search already paid for can be reused.
    const Vec v = z + ls.alpha * (w - z);
    const Vec g = ls.gradient ? *ls.gradient : obj.gradient(v, rec.counter());
    Vec w_next = v - s.gamma * g;
    Vec z_next = z + s.tau_prime * (v - z) - s.gamma_prime * g;
    rec.check_finite(w_next, z_next, w, z);
    w = std::move(w_next);
    z = std::move(z_next);
    const bool stop = rec.budget_exhausted();
    rec.record(k + 1, std::nan(""), w, z, stop || k + 1 == k_max);
    if (stop) break;
  }
  rec.trace().params["bisections"] = static_cast<double>(bisections);
  rec.trace().params["capped_searches"] = static_cast<double>(capped);
  return rec.finish(w, z);
}

}  // namespace

RunTrace hss_agd_strong(const Objective& obj, const Vec& w0, const Vec& z0, double rho, double mu, double L,
                        std::size_t k_max, const RunOptions& opts, const HssOptions& hss) {
  require(rho > 0.0 && mu > 0.0 && L > 0.0, "hss_agd_strong: rho, mu, L must be positive");
  const HssStep step{rho * mu / 2.0, std::sqrt(L / mu), 0.0, rho * std::sqrt(mu / L), 1.0 / L,
                     1.0 / std::sqrt(mu * L)};
  RunTrace t = run_hss("hss-strong", obj, w0, z0, L, k_max, opts, hss, [&](std::size_t) { return step; });
  t.params.insert({{"rho", rho}, {"mu", mu}, {"L", L}});
  return t;
}

RunTrace hss_agd_quasar(const Objective& obj, const Vec& w0, const Vec& z0, double rho, double L, double eps,
                        std::size_t k_max, const RunOptions& opts, const HssOptions& hss) {
  require(rho > 0.0 && L > 0.0, "hss_agd_quasar: rho and L must be positive");
  require(eps > 0.0, "hss_agd_quasar: eps must be positive");
  const std::vector<double> theta = hss_theta_sequence(k_max + 1);
  RunTrace t = run_hss("hss-quasar", obj, w0, z0, L, k_max, opts, hss, [&](std::size_t k) {
    return HssStep{0.0, rho * (1.0 / theta[k] - 1.0), rho * eps / 2.0, 0.0, 1.0 / L, rho / (L * theta[k + 1])};
  });
  t.params.insert({{"rho", rho}, {"L", L}, {"eps", eps}});
  return t;
}

}  // namespace quasar
