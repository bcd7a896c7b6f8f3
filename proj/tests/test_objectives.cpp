#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "helpers.hpp"
#include "quasar/objectives.hpp"
#include "quasar/problem_io.hpp"

using namespace quasar;
using qt::vec;

namespace {

std::vector<LinkFunction> all_links() {
  return {LinkFunction::identity(), LinkFunction::logistic(), LinkFunction::relu(), LinkFunction::leaky_relu(0.5),
          LinkFunction::quadratic()};
}

}  // namespace

TEST_CASE("link constants") {
  CHECK(LinkFunction::leaky_relu(0.5).eval(-2.0) == -1.0);
  CHECK(LinkFunction::leaky_relu(0.5).eval(3.0) == 3.0);
  CHECK(*LinkFunction::leaky_relu(0.3).lipschitz() == 1.0);
  CHECK(LinkFunction::leaky_relu(0.3).increase_alpha() == 0.3);
  CHECK(*LinkFunction::logistic().lipschitz() == 0.25);
  CHECK(LinkFunction::logistic().increase_alpha() == 0.0);
  CHECK_FALSE(LinkFunction::quadratic().lipschitz().has_value());
  CHECK(LinkFunction::relu().deriv(0.0) == 0.0);
  CHECK(LinkFunction::leaky_relu(0.5).deriv(0.0) == 0.5);
  CHECK_THROWS_AS(LinkFunction::leaky_relu(0.0), InvalidArgument);
  CHECK_THROWS_AS(LinkFunction::leaky_relu(1.5), InvalidArgument);
  CHECK(parse_link_kind("leaky-relu") == LinkKind::leaky_relu);
  CHECK_THROWS_AS(parse_link_kind("tanh"), InvalidArgument);
}

TEST_CASE("link derivatives match central differences away from kinks") {
  SeededRng rng(5, 5);
  for (const LinkFunction& s : all_links()) {
    for (int i = 0; i < 200; ++i) {
      const double z = 4.0 * rng.normal();
      if (std::abs(z) < 1e-3) continue;
      const double h = 1e-6 * (1.0 + std::abs(z));
      const double fd = (s.eval(z + h) - s.eval(z - h)) / (2 * h);
      CHECK(std::abs(fd - s.deriv(z)) <= 1e-6 * std::max(1.0, std::abs(s.deriv(z))));
    }
  }
}

TEST_CASE("secant slope") {
  const LinkFunction s = LinkFunction::leaky_relu(0.5);
  CHECK(s.secant(-2.0, 2.0) == doctest::Approx(0.75));
  CHECK(s.secant(1.0, 1.0) == 1.0);
  CHECK(LinkFunction::logistic().secant(0.3, 0.3) == doctest::Approx(LinkFunction::logistic().deriv(0.3)));
}

TEST_CASE("generated problems: shapes and exact labels") {
  SeededRng rng(1, 1);
  const GlmProblem p = generate_problem(rng, 1000, 50, LinkFunction::logistic());
  CHECK(p.X.rows() == 1000);
  CHECK(p.X.cols() == 50);
  CHECK(p.y.size() == 1000);
  CHECK(p.w_star.size() == 50);
  for (const LinkFunction& s : all_links()) {
    SeededRng r2(3, 4);
    const GlmProblem q = generate_problem(r2, 200, 5, s);
    const Objective f = empirical_objective(q);
    CHECK(f.value(q.w_star) == 0.0);
    CHECK(f.gradient(q.w_star).norm() == 0.0);
  }
}

TEST_CASE("feature second moment is one") {
  SeededRng rng(8, 8);
  const GlmProblem p = generate_problem(rng, 100000, 1, LinkFunction::leaky_relu(0.5));
  CHECK(std::abs(p.X.col(0).squaredNorm() / 1e5 - 1.0) <= 0.02);
}

TEST_CASE("initial point scale and determinism") {
  double s = 0.0;
  const int reps = 2000;
  for (int i = 0; i < reps; ++i) {
    SeededRng rng(17, static_cast<std::uint64_t>(i));
    s += initial_point(rng, 50).norm();
  }
  CHECK(std::abs(s / reps - 0.0707) <= 0.00707);

  SeededRng a(3, 3), b(3, 3), c(3, 3);
  CHECK(initial_point(a, 50) == initial_point(b, 50));
  const double zeta = c.normal();
  SeededRng d(3, 3);
  CHECK(initial_point(d, 1)(0) == 1e-2 * zeta);
}

TEST_CASE("empirical objective: one-sample identity example") {
  GlmProblem p;
  p.X = Mat::Ones(1, 1);
  p.y = vec({2.0});
  p.w_star = vec({2.0});
  p.link = LinkFunction::identity();
  const Objective f = empirical_objective(p);
  CHECK(f.value(vec({0.0})) == 2.0);
  CHECK(f.gradient(vec({0.0}))(0) == -2.0);
}

TEST_CASE("empirical gradients match central differences for every link") {
  for (const LinkFunction& s : all_links()) {
    SeededRng rng(21, 1);
    const GlmProblem p = generate_problem(rng, 30, 4, s);
    const Objective f = empirical_objective(p);
    int tested = 0;
    while (tested < 20) {
      const Vec w = rng.normal_vector(4);
      if ((p.X * w).cwiseAbs().minCoeff() < 1e-3) continue;  // stay off the kinks
      const Vec g = f.gradient(w);
      const double h = 1e-6 * (1.0 + w.norm());
      Vec fd(4);
      for (int j = 0; j < 4; ++j) {
        Vec e = Vec::Zero(4);
        e(j) = h;
        fd(j) = (f.value(w + e) - f.value(w - e)) / (2 * h);
      }
      CHECK((fd - g).norm() <= 1e-5 * std::max(1.0, g.norm()));
      ++tested;
    }
  }
}

TEST_CASE("pseudo-gradient examples") {
  GlmProblem p;
  p.X = Mat::Constant(1, 1, 2.0);
  p.w_star = vec({0.5});
  p.link = LinkFunction::relu();
  p.y = vec({1.0});
  CHECK(pseudo_gradient(p, vec({1.0}), 0)(0) == 2.0);
  CHECK(pseudo_gradient(p, p.w_star, 0).norm() == 0.0);
  CHECK_THROWS_AS(pseudo_gradient(p, vec({1.0}), 1), InvalidArgument);

  SeededRng rng(4, 4);
  const GlmProblem q = generate_problem(rng, 50, 3, LinkFunction::identity());
  const Vec w = rng.normal_vector(3);
  Vec avg = Vec::Zero(3);
  for (int i = 0; i < 50; ++i) avg += pseudo_gradient(q, w, i) / 50.0;
  CHECK((avg - empirical_objective(q).gradient(w)).norm() <= 1e-12);
}

TEST_CASE("expected pseudo-gradient correlation equals the H-norm") {
  SeededRng rng(6, 6);
  const GlmProblem p = generate_problem(rng, 400, 5, LinkFunction::leaky_relu(0.2));
  const Vec w = rng.normal_vector(5);
  Vec avg = Vec::Zero(5);
  Mat H = Mat::Zero(5, 5);
  for (int i = 0; i < 400; ++i) {
    avg += pseudo_gradient(p, w, i) / 400.0;
    const Vec x = p.X.row(i).transpose();
    H += p.link.secant(w.dot(x), p.w_star.dot(x)) * x * x.transpose() / 400.0;
  }
  const Vec e = w - p.w_star;
  CHECK(avg.dot(e) == doctest::Approx(e.dot(H * e)).epsilon(1e-10));
  CHECK(avg.dot(e) > 0.0);
}

TEST_CASE("GLM constants: identity link moments") {
  SeededRng rng(10, 10);
  GlmProblem p = generate_problem(rng, 100000, 1, LinkFunction::identity());
  SeededRng mc(10, 11);
  const GlmConstants c = estimate_glm_constants(p, vec({0.0}), 100000, mc, MomentSource::gaussian);
  CHECK(std::abs(c.mu - 1.0) <= 0.02);
  CHECK(std::abs(c.R2 - 3.0) <= 0.2);
  CHECK(c.kappa_tilde <= c.R2 / c.mu * (1 + 1e-8));
}

TEST_CASE("GLM constants: kappa_tilde <= R2/mu and error cases") {
  SeededRng rng(12, 12);
  const GlmProblem p = generate_problem(rng, 500, 6, LinkFunction::leaky_relu(0.5));
  SeededRng mc(12, 13);
  const GlmConstants c = estimate_glm_constants(p, Vec::Zero(6), 5000, mc);
  CHECK(c.kappa_tilde <= c.R2 / c.mu * (1 + 1e-8));
  CHECK(c.mu > 0.0);
  CHECK_THROWS_AS(estimate_glm_constants(p, Vec::Zero(6), 3, mc), InvalidArgument);
  SeededRng r2(1, 2);
  const GlmProblem q = generate_problem(r2, 50, 3, LinkFunction::logistic());
  CHECK_THROWS_AS(estimate_glm_constants(q, Vec::Zero(3), 100, mc), InvalidArgument);

  GlmProblem flat;
  flat.X = Mat::Zero(10, 2);
  flat.X.col(0).setOnes();
  flat.w_star = vec({1.0, 1.0});
  flat.link = LinkFunction::identity();
  flat.y = flat.X * flat.w_star;
  CHECK_THROWS_AS(estimate_glm_constants(flat, Vec::Zero(2), 20, mc), RankDeficient);
}

TEST_CASE("problem files round-trip bit-exactly") {
  SeededRng rng(77, 1);
  const GlmProblem p = generate_problem(rng, 20, 3, LinkFunction::leaky_relu(0.25));
  const auto dir = std::filesystem::temp_directory_path() / "quasar_problem_io";
  std::filesystem::create_directories(dir);
  write_problem(p, dir / "p");
  const GlmProblem q = read_problem(dir / "p");
  CHECK(q.X == p.X);
  CHECK(q.y == p.y);
  CHECK(q.w_star == p.w_star);
  CHECK(q.link.kind() == LinkKind::leaky_relu);
  CHECK(q.link.alpha() == 0.25);
  CHECK(q.seed == 77);
  CHECK_THROWS(read_problem(dir / "missing"));
}
