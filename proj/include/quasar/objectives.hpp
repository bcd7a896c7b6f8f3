#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "quasar/common.hpp"
#include "quasar/event_clock.hpp"

namespace quasar {

enum class LinkKind { identity, logistic, relu, leaky_relu, quadratic };

std::string to_string(LinkKind kind);
LinkKind parse_link_kind(const std::string& name);

/// Scalar link sigma of a generalized linear model.
class LinkFunction {
 public:
  static LinkFunction identity();
  static LinkFunction logistic();
  static LinkFunction relu();
  /// max(alpha z, z) with 0 < alpha <= 1.
  static LinkFunction leaky_relu(double alpha);
  static LinkFunction quadratic();
  /// Builds from a kind; `alpha` is only read for leaky_relu.
  static LinkFunction make(LinkKind kind, double alpha = 0.0);

  LinkKind kind() const { return kind_; }
  /// Leaky slope (0 for other kinds).
  double alpha() const { return alpha_; }

  double eval(double z) const;
  /// Almost-everywhere derivative. relu'(0) = 0, leaky_relu'(0) = alpha.
  double deriv(double z) const;
  /// Secant slope (sigma(a) - sigma(b)) / (a - b), with psi(a, a) = sigma'(a).
  double secant(double a, double b) const;

  /// Global Lipschitz constant L0, or nullopt when unbounded (quadratic).
  std::optional<double> lipschitz() const;
  /// Global lower bound on sigma' (0 when the link is not alpha-increasing).
  double increase_alpha() const;

  std::string name() const { return to_string(kind_); }

 private:
  LinkFunction(LinkKind kind, double alpha) : kind_(kind), alpha_(alpha) {}
  LinkKind kind_;
  double alpha_;
};

/// Realizable GLM dataset: rows of X are samples, y_i = sigma(w_star . x_i).
struct GlmProblem {
  Mat X;
  Vec y;
  Vec w_star;
  LinkFunction link = LinkFunction::identity();
  std::uint64_t seed = 0;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }

  /// Throws InvalidArgument on inconsistent shapes.
  void validate() const;
};

/// Counts oracle calls for one run. Never shared between runs.
struct EvalCounter {
  std::uint64_t grad_calls = 0;
  std::uint64_t func_calls = 0;
};

/// Differentiable objective. Immutable once built; safe to share across threads.
class Objective {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;

  Objective(Eigen::Index dim, ValueFn f, GradFn grad,
            std::optional<double> smoothness_L = std::nullopt);

  Eigen::Index dim() const { return dim_; }
  double value(const Vec& w) const;
  Vec gradient(const Vec& w) const;

  double value(const Vec& w, EvalCounter& counter) const {
    ++counter.func_calls;
    return value(w);
  }
  Vec gradient(const Vec& w, EvalCounter& counter) const {
    ++counter.grad_calls;
    return gradient(w);
  }

  const std::optional<double>& smoothness_L() const { return smoothness_L_; }

 private:
  Eigen::Index dim_;
  ValueFn f_;
  GradFn grad_;
  std::optional<double> smoothness_L_;
};

/// f(w) = 1/2 (w - w_star)^T A (w - w_star); A symmetric PSD.
Objective quadratic_objective(const Mat& A, const Vec& w_star);
/// Diagonal special case.
Objective diagonal_quadratic(const Vec& diag, const Vec& w_star);

/// X rows and w_star i.i.d. N(0, I_d), labels exact.
GlmProblem generate_problem(SeededRng& rng, Eigen::Index n, Eigen::Index d, const LinkFunction& link);

/// 1e-2 * zeta with zeta ~ N(0, I_d).
Vec initial_point(SeededRng& rng, Eigen::Index d);

/// f(w) = (1/n) sum 1/2 (sigma(w.x_i) - y_i)^2 and its gradient.
/// The returned objective keeps its own copy of the problem.
Objective empirical_objective(const GlmProblem& problem);
Objective empirical_objective(std::shared_ptr<const GlmProblem> problem);

/// g(w; i) = (sigma(w.x_i) - y_i) x_i.
Vec pseudo_gradient(const GlmProblem& problem, const Vec& w, Eigen::Index sample_index);

/// Where estimate_glm_constants draws its Monte-Carlo features from.
enum class MomentSource {
  dataset,   ///< rows of X, uniformly with replacement
  gaussian,  ///< fresh N(0, I_d) draws (population model of the generator)
};

struct GlmConstants {
  double mu = 0.0;           ///< alpha * theta_hat
  double theta = 0.0;        ///< lambda_min of the sample second moment
  double R2 = 0.0;           ///< E[psi^2 |x|^2 x x^T] <= R2 H
  double kappa_tilde = 0.0;  ///< E[psi^2 |x|^2_{H^-1} x x^T] <= kappa_tilde H
  Mat H;                     ///< E[psi(w.x, w_star.x) x x^T]
};

/// Monte-Carlo estimates of mu, R^2 and kappa_tilde at the reference point w.
/// `alpha_override` supplies the increase constant for links whose global
/// value is 0 (logistic on a bounded region).
GlmConstants estimate_glm_constants(const GlmProblem& problem, const Vec& w, std::size_t mc_samples,
                                    SeededRng& rng, MomentSource source = MomentSource::dataset,
                                    std::optional<double> alpha_override = std::nullopt);

/// Smallest eigenvalue of (1/n) X^T X.
double min_second_moment_eigenvalue(const Mat& X);

}  // namespace quasar
