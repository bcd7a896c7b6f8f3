#include "quasar/objectives.hpp"

#include <cmath>

namespace quasar {

std::string to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::identity: return "identity";
    case LinkKind::logistic: return "logistic";
    case LinkKind::relu: return "relu";
    case LinkKind::leaky_relu: return "leaky_relu";
    case LinkKind::quadratic: return "quadratic";
  }
  return "unknown";
}

LinkKind parse_link_kind(const std::string& name) {
  if (name == "identity") return LinkKind::identity;
  if (name == "logistic") return LinkKind::logistic;
  if (name == "relu") return LinkKind::relu;
  if (name == "leaky_relu" || name == "leaky-relu") return LinkKind::leaky_relu;
  if (name == "quadratic") return LinkKind::quadratic;
  throw InvalidArgument("unknown link '" + name + "'");
}

LinkFunction LinkFunction::identity() { return {LinkKind::identity, 0.0}; }
LinkFunction LinkFunction::logistic() { return {LinkKind::logistic, 0.0}; }
LinkFunction LinkFunction::relu() { return {LinkKind::relu, 0.0}; }
LinkFunction LinkFunction::quadratic() { return {LinkKind::quadratic, 0.0}; }

LinkFunction LinkFunction::leaky_relu(double alpha) {
  require(alpha > 0.0 && alpha <= 1.0, "leaky_relu: alpha must lie in (0, 1]");
  return {LinkKind::leaky_relu, alpha};
}

LinkFunction LinkFunction::make(LinkKind kind, double alpha) {
  if (kind == LinkKind::leaky_relu) return leaky_relu(alpha);
  return {kind, 0.0};
}

double LinkFunction::eval(double z) const {
  switch (kind_) {
    case LinkKind::identity: return z;
    case LinkKind::logistic: return 1.0 / (1.0 + std::exp(-z));
    case LinkKind::relu: return z > 0.0 ? z : 0.0;
    case LinkKind::leaky_relu: return z > 0.0 ? z : alpha_ * z;
    case LinkKind::quadratic: return z * z;
  }
  return 0.0;
}

double LinkFunction::deriv(double z) const {
  switch (kind_) {
    case LinkKind::identity: return 1.0;
    case LinkKind::logistic: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case LinkKind::relu: return z > 0.0 ? 1.0 : 0.0;
    case LinkKind::leaky_relu: return z > 0.0 ? 1.0 : alpha_;
    case LinkKind::quadratic: return 2.0 * z;
  }
  return 0.0;
}

double LinkFunction::secant(double a, double b) const {
  const double gap = a - b;
  if (std::abs(gap) <= 1e-12 * (1.0 + std::abs(a))) return deriv(0.5 * (a + b));
  return (eval(a) - eval(b)) / gap;
}

std::optional<double> LinkFunction::lipschitz() const {
  switch (kind_) {
    case LinkKind::logistic: return 0.25;
    case LinkKind::quadratic: return std::nullopt;
    default: return 1.0;
  }
}

double LinkFunction::increase_alpha() const {
  switch (kind_) {
    case LinkKind::identity: return 1.0;
    case LinkKind::leaky_relu: return alpha_;
    default: return 0.0;
  }
}

void GlmProblem::validate() const {
  require(X.rows() >= 1 && X.cols() >= 1, "GlmProblem: need n >= 1 and d >= 1");
  require(y.size() == X.rows(), "GlmProblem: label count does not match rows of X");
  require(w_star.size() == X.cols(), "GlmProblem: w_star dimension does not match X");
}

Objective::Objective(Eigen::Index dim, ValueFn f, GradFn grad, std::optional<double> smoothness_L)
    : dim_(dim), f_(std::move(f)), grad_(std::move(grad)), smoothness_L_(smoothness_L) {
  require(dim_ >= 1, "Objective: dimension must be positive");
}

double Objective::value(const Vec& w) const {
  require(w.size() == dim_, "Objective::value: dimension mismatch");
  return f_(w);
}

Vec Objective::gradient(const Vec& w) const {
  require(w.size() == dim_, "Objective::gradient: dimension mismatch");
  return grad_(w);
}

Objective quadratic_objective(const Mat& A, const Vec& w_star) {
  require(A.rows() == A.cols() && A.rows() == w_star.size(), "quadratic_objective: shape mismatch");
  Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
  const double L = es.eigenvalues().maxCoeff();
  return Objective(
      A.rows(),
      [A, w_star](const Vec& w) {
        const Vec e = w - w_star;
        return 0.5 * e.dot(A * e);
      },
      [A, w_star](const Vec& w) { return Vec(A * (w - w_star)); }, L);
}

Objective diagonal_quadratic(const Vec& diag, const Vec& w_star) {
  require(diag.size() == w_star.size(), "diagonal_quadratic: shape mismatch");
  return Objective(
      diag.size(),
      [diag, w_star](const Vec& w) {
        const Vec e = w - w_star;
        return 0.5 * e.dot(diag.cwiseProduct(e));
      },
      [diag, w_star](const Vec& w) { return Vec(diag.cwiseProduct(w - w_star)); },
      diag.maxCoeff());
}

GlmProblem generate_problem(SeededRng& rng, Eigen::Index n, Eigen::Index d, const LinkFunction& link) {
  require(n >= 1 && d >= 1, "generate_problem: n and d must be positive");
  GlmProblem p;
  p.link = link;
  p.seed = rng.master_seed();
  p.X.resize(n, d);
  // Row-major fill order so that growing n keeps the earlier rows.
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) p.X(i, j) = rng.normal();
  p.w_star = rng.normal_vector(d);
  const Vec z = p.X * p.w_star;
  p.y = z.unaryExpr([&link](double v) { return link.eval(v); });
  return p;
}

Vec initial_point(SeededRng& rng, Eigen::Index d) {
  require(d >= 1, "initial_point: d must be positive");
  return 1e-2 * rng.normal_vector(d);
}

Objective empirical_objective(const GlmProblem& problem) {
  return empirical_objective(std::make_shared<const GlmProblem>(problem));
}

Objective empirical_objective(std::shared_ptr<const GlmProblem> problem) {
  problem->validate();
  const auto d = problem->d();
  auto value = [p = problem](const Vec& w) {
    const Vec z = p->X * w;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double r = p->link.eval(z[i]) - p->y[i];
      acc += 0.5 * r * r;
    }
    return acc / static_cast<double>(p->n());
  };
  auto grad = [p = problem](const Vec& w) {
    const Vec z = p->X * w;
    Vec s(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i)
      s[i] = (p->link.eval(z[i]) - p->y[i]) * p->link.deriv(z[i]);
    return Vec(p->X.transpose() * s / static_cast<double>(p->n()));
  };
  return Objective(d, value, grad);
}

Vec pseudo_gradient(const GlmProblem& problem, const Vec& w, Eigen::Index sample_index) {
  if (sample_index < 0 || sample_index >= problem.n())
    throw InvalidArgument("pseudo_gradient: sample index out of range");
  const auto x = problem.X.row(sample_index);
  const double r = problem.link.eval(x.dot(w)) - problem.y[sample_index];
  return r * x.transpose();
}

double min_second_moment_eigenvalue(const Mat& X) {
  const Mat S = X.transpose() * X / static_cast<double>(X.rows());
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

namespace {

// Largest eigenvalue of the pencil (M, H), i.e. of H^{-1/2} M H^{-1/2}.
double pencil_max_eigenvalue(const Mat& M, const Mat& H) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(M, H, Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success) throw RankDeficient("estimate_glm_constants: H(w) is not positive definite");
  return ges.eigenvalues().maxCoeff();
}

}  // namespace

GlmConstants estimate_glm_constants(const GlmProblem& problem, const Vec& w, std::size_t mc_samples,
                                    SeededRng& rng, MomentSource source, std::optional<double> alpha_override) {
  problem.validate();
  const auto d = problem.d();
  require(w.size() == d, "estimate_glm_constants: w has wrong dimension");
  const double alpha = alpha_override.value_or(problem.link.increase_alpha());
  require(alpha > 0.0, "estimate_glm_constants: link is not alpha-increasing; supply alpha explicitly");
  require(mc_samples >= static_cast<std::size_t>(d), "estimate_glm_constants: need mc_samples >= d");

  const auto m = static_cast<Eigen::Index>(mc_samples);
  Mat S(m, d);
  for (Eigen::Index k = 0; k < m; ++k) {
    if (source == MomentSource::dataset)
      S.row(k) = problem.X.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(problem.n()))));
    else
      for (Eigen::Index j = 0; j < d; ++j) S(k, j) = rng.normal();
  }

  const Vec a = S * w;
  const Vec b = S * problem.w_star;
  Vec psi(m);
  for (Eigen::Index k = 0; k < m; ++k) psi[k] = problem.link.secant(a[k], b[k]);

  const double inv_m = 1.0 / static_cast<double>(m);
  GlmConstants out;
  out.theta = min_second_moment_eigenvalue(S);
  out.mu = alpha * out.theta;
  out.H = S.transpose() * psi.asDiagonal() * S * inv_m;

  Eigen::LLT<Mat> llt(out.H);
  if (llt.info() != Eigen::Success) throw RankDeficient("estimate_glm_constants: H(w) is singular");

  const Vec sq_norm = S.rowwise().squaredNorm();
  const Mat Hinv_St = llt.solve(S.transpose());
  Vec h_norm(m);
  for (Eigen::Index k = 0; k < m; ++k) h_norm[k] = S.row(k).dot(Hinv_St.col(k));

  const Vec weight_R = psi.cwiseProduct(psi).cwiseProduct(sq_norm);
  const Vec weight_K = psi.cwiseProduct(psi).cwiseProduct(h_norm);
  const Mat M_R = S.transpose() * weight_R.asDiagonal() * S * inv_m;
  const Mat M_K = S.transpose() * weight_K.asDiagonal() * S * inv_m;
  out.R2 = pencil_max_eigenvalue(M_R, out.H);
  out.kappa_tilde = pencil_max_eigenvalue(M_K, out.H);

  // kappa_tilde <= R2 / lambda_min(H) <= R2 / mu holds for the sample itself.
  if (out.kappa_tilde > out.R2 / out.mu * (1.0 + 1e-8))
    throw Error("estimate_glm_constants: kappa_tilde exceeds R2/mu; the increase constant is too large");
  return out;
}

}  // namespace quasar
