#include "quasar/quasar_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace quasar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PointTerm {
  double margin;
  double scale;                     // magnitude of the compared quantities
  std::optional<double> constant;   // per-point estimate of the certified constant
};

double f_gap_floor(double f_star) { return 1e-12 * (1.0 + std::abs(f_star)); }

template <typename Fn>
CertReport certify(std::string property, const PointSet& points, double tol, Fn&& term_at) {
  require(!points.empty(), property + ": point set is empty");
  CertReport r;
  r.property = std::move(property);
  r.worst_margin = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  double constant = std::numeric_limits<double>::infinity();
  bool any_constant = false;
  for (const Vec& w : points) {
    const PointTerm t = term_at(w);
    scale = std::max(scale, t.scale);
    if (t.margin < r.worst_margin) {
      r.worst_margin = t.margin;
      r.worst_point = w;
    }
    if (t.constant) {
      any_constant = true;
      constant = std::min(constant, *t.constant);
    }
  }
  r.points_tested = points.size();
  r.estimated_constant = any_constant ? constant : kNaN;
  r.tolerance = tol >= 0.0 ? tol : default_tolerance(scale);
  r.holds = r.worst_margin >= -r.tolerance;
  return r;
}

}  // namespace

void QuasarConstants::validate() const {
  require(rho > 0.0, "QuasarConstants: rho must be positive");
  require(mu >= 0.0, "QuasarConstants: mu must be nonnegative");
  require(L > 0.0, "QuasarConstants: L must be positive");
}

nlohmann::json to_json(const CertReport& report) {
  nlohmann::json j;
  j["property"] = report.property;
  j["holds"] = report.holds;
  if (std::isfinite(report.estimated_constant))
    j["estimated_constant"] = report.estimated_constant;
  else
    j["estimated_constant"] = nullptr;
  j["worst_violation"] = {
      {"point", std::vector<double>(report.worst_point.data(), report.worst_point.data() + report.worst_point.size())},
      {"margin", report.worst_margin}};
  j["points_tested"] = report.points_tested;
  j["tolerance"] = report.tolerance;
  return j;
}

double default_tolerance(double margin_scale) { return 1e-9 * (1.0 + std::abs(margin_scale)); }

PointSet sample_ball(SeededRng& rng, const Vec& center, double radius, std::size_t count) {
  require(radius >= 0.0, "sample_ball: radius must be nonnegative");
  const auto d = center.size();
  PointSet pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec dir = rng.normal_vector(d);
    const double norm = dir.norm();
    if (norm == 0.0) {
      pts.push_back(center);
      continue;
    }
    const double r = radius * std::pow(rng.uniform_open0(), 1.0 / static_cast<double>(d));
    pts.push_back(center + (r / norm) * dir);
  }
  return pts;
}

CertReport check_quasar(const Objective& obj, const Vec& w_star, double rho, const PointSet& points, double tol) {
  require(rho > 0.0, "check_quasar: rho must be positive");
  const double f_star = obj.value(w_star);
  return certify("quasar", points, tol, [&](const Vec& w) {
    const double gap = obj.value(w) - f_star;
    const double inner = obj.gradient(w).dot(w - w_star);
    std::optional<double> c;
    if (gap > f_gap_floor(f_star)) c = std::max(0.0, inner / gap);
    return PointTerm{inner - rho * gap, std::max(std::abs(inner), std::abs(rho * gap)), c};
  });
}

CertReport check_strong_quasar(const Objective& obj, const Vec& w_star, double rho, double mu, const PointSet& points,
                               double tol) {
  require(rho > 0.0 && mu > 0.0, "check_strong_quasar: rho and mu must be positive");
  const double f_star = obj.value(w_star);
  return certify("strong-quasar", points, tol, [&](const Vec& w) {
    const Vec e = w - w_star;
    const double gap = obj.value(w) - f_star;
    const double inner = obj.gradient(w).dot(e) / rho;
    const double sq = e.squaredNorm();
    std::optional<double> c;
    if (sq > 0.0) c = 2.0 * (inner - gap) / sq;
    const double quad = 0.5 * mu * sq;
    return PointTerm{inner - gap - quad, std::max({std::abs(inner), std::abs(gap), quad}), c};
  });
}

CertReport check_one_point_convex(const Objective& obj, const Vec& w_star, double C_v, const PointSet& points,
                                  double tol) {
  require(C_v > 0.0, "check_one_point_convex: C_v must be positive");
  return certify("one-point", points, tol, [&](const Vec& w) {
    const Vec e = w - w_star;
    const double inner = obj.gradient(w).dot(e);
    const double sq = e.squaredNorm();
    std::optional<double> c;
    if (sq > 0.0) c = inner / sq;
    return PointTerm{inner - C_v * sq, std::max(std::abs(inner), C_v * sq), c};
  });
}

CertReport check_pl(const Objective& obj, double f_star, double nu, const PointSet& points, double tol) {
  require(nu > 0.0, "check_pl: nu must be positive");
  return certify("pl", points, tol, [&](const Vec& w) {
    const double gap = obj.value(w) - f_star;
    const double g2 = obj.gradient(w).squaredNorm();
    std::optional<double> c;
    if (gap > f_gap_floor(f_star)) c = g2 / (2.0 * gap);
    return PointTerm{g2 - 2.0 * nu * gap, std::max(g2, std::abs(2.0 * nu * gap)), c};
  });
}

CertReport check_qg(const Objective& obj, const Vec& w_star, double nu, const PointSet& points, double tol) {
  require(nu > 0.0, "check_qg: nu must be positive");
  const double f_star = obj.value(w_star);
  return certify("qg", points, tol, [&](const Vec& w) {
    const double gap = obj.value(w) - f_star;
    const double sq = (w - w_star).squaredNorm();
    std::optional<double> c;
    if (sq > 0.0) c = 2.0 * gap / sq;
    return PointTerm{gap - 0.5 * nu * sq, std::max(std::abs(gap), 0.5 * nu * sq), c};
  });
}

double estimate_rho(const Objective& obj, const Vec& w_star, const PointSet& points) {
  const double f_star = obj.value(w_star);
  const double floor = f_gap_floor(f_star);
  double best = std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  for (const Vec& w : points) {
    const double gap = obj.value(w) - f_star;
    if (gap <= floor) continue;
    best = std::min(best, obj.gradient(w).dot(w - w_star) / gap);
    ++used;
  }
  if (used == 0) throw InsufficientSamples("estimate_rho: every point lies within the f-gap floor of the optimum");
  return std::max(0.0, best);
}

CertReport check_coherence(const Objective& obj, const Vec& w_star, const CoherenceWitness& witness,
                           const PointSet& points, double tol) {
  require(witness.C_v > 0.0 && witness.C_l > 0.0, "check_coherence: C_v and C_l must be positive");
  require(static_cast<bool>(witness.h), "check_coherence: witness has no h");
  const double f_star = obj.value(w_star);
  const double h_origin = witness.h(w_star, w_star);
  CertReport r = certify("coherence", points, tol, [&](const Vec& w) {
    const double h = witness.h(w, w_star);
    const double inner = obj.gradient(w).dot(w - w_star);
    const double gap = obj.value(w) - f_star;
    const double coherent = inner - witness.C_v * h;
    const double smooth = witness.C_l * h - gap;
    std::optional<double> c;
    if (h > 0.0) c = inner / h;
    // h < 0 counts as a violation of its own.
    const double margin = std::min({coherent, smooth, h});
    return PointTerm{margin, std::max({std::abs(inner), std::abs(gap), std::abs(h)}), c};
  });
  if (std::abs(h_origin) > r.tolerance) r.holds = false;
  return r;
}

double coherence_to_quasar(double C_v, double C_l) {
  require(C_v > 0.0 && C_l > 0.0, "coherence_to_quasar: constants must be positive");
  return C_v / C_l;
}

double glm_quasar_constant(double alpha, double L0) {
  require(alpha > 0.0 && L0 > 0.0, "glm_quasar_constant: alpha and L0 must be positive");
  return 2.0 * alpha * alpha / (L0 * L0);
}

std::pair<double, double> one_point_to_strong_quasar(double rho_hat, double C_v, double theta) {
  require(theta > 1.0, "one_point_to_strong_quasar: theta must exceed 1");
  require(rho_hat > 0.0 && C_v > 0.0, "one_point_to_strong_quasar: rho_hat and C_v must be positive");
  return {rho_hat / theta, 2.0 * C_v * (theta - 1.0) / rho_hat};
}

std::pair<double, double> qg_to_strong_quasar(double rho_hat, double nu, double theta) {
  require(theta > 0.0 && theta < 1.0, "qg_to_strong_quasar: theta must lie in (0, 1)");
  require(rho_hat > 0.0 && nu > 0.0, "qg_to_strong_quasar: rho_hat and nu must be positive");
  return {rho_hat * theta, nu * (1.0 - theta) / theta};
}

double glm_qg_constant(double alpha, double lambda_min) {
  require(alpha > 0.0 && lambda_min > 0.0, "glm_qg_constant: alpha and lambda_min must be positive");
  return alpha * alpha * lambda_min;
}

double relu_gen_smooth_constant(const GlmProblem& problem) {
  problem.validate();
  return 0.5 * problem.X.rowwise().squaredNorm().mean();
}

double phase_retrieval_cr(const GlmProblem& problem, double radius, std::size_t mc_points, SeededRng& rng) {
  problem.validate();
  require(radius >= 0.0, "phase_retrieval_cr: radius must be nonnegative");
  const Vec sq_norm = problem.X.rowwise().squaredNorm();
  auto moment = [&](const Vec& w) {
    const Vec proj = problem.X * (w + problem.w_star);
    return proj.cwiseProduct(proj).cwiseProduct(sq_norm).mean();
  };
  // The moment is a convex quadratic in w, so its maximum over a ball sits on
  // the sphere. Antithetic directions make the estimate nondecreasing in R.
  double best = std::max(moment(-problem.w_star), moment(problem.w_star));
  const std::size_t directions = std::max<std::size_t>(1, (mc_points + 1) / 2);
  for (std::size_t i = 0; i < directions; ++i) {
    Vec u = rng.normal_vector(problem.d());
    const double norm = u.norm();
    if (norm == 0.0) continue;
    u *= radius / norm;
    for (const double sign : {1.0, -1.0}) {
      const Vec center = sign * problem.w_star;
      best = std::max({best, moment(center + u), moment(center - u)});
    }
  }
  return best;
}

double estimate_smoothness_L(const Objective& obj, const std::vector<std::pair<Vec, Vec>>& pairs) {
  double best = 0.0;
  std::size_t used = 0;
  for (const auto& [a, b] : pairs) {
    const double dist = (a - b).norm();
    if (dist == 0.0) continue;
    best = std::max(best, (obj.gradient(a) - obj.gradient(b)).norm() / dist);
    ++used;
  }
  if (used == 0) throw InsufficientSamples("estimate_smoothness_L: no pair of distinct points");
  return best;
}

}  // namespace quasar
