#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "quasar/quasar_analysis.hpp"

using namespace quasar;
using qt::half_norm;
using qt::vec;

namespace {

PointSet some_points(Eigen::Index d, std::size_t n = 200) {
  SeededRng rng(31, 1);
  return sample_ball(rng, Vec::Zero(d), 3.0, n);
}

}  // namespace

TEST_CASE("quasar check on 1/2|w|^2") {
  const Objective f = half_norm(3);
  const PointSet pts = some_points(3);
  const Vec zero = Vec::Zero(3);
  CHECK(check_quasar(f, zero, 1.0, pts).holds);
  const CertReport tight = check_quasar(f, zero, 2.0, pts);
  CHECK(tight.holds);
  CHECK(std::abs(tight.worst_margin) <= 1e-12);
  CHECK_FALSE(check_quasar(f, zero, 3.0, pts).holds);
  CHECK(tight.points_tested == pts.size());
}

TEST_CASE("estimate_rho") {
  const Objective f = half_norm(4);
  CHECK(estimate_rho(f, Vec::Zero(4), some_points(4)) == 2.0);
  CHECK_THROWS_AS(estimate_rho(f, Vec::Zero(4), PointSet{Vec::Zero(4)}), InsufficientSamples);
}

TEST_CASE("estimate_rho: frozen 1-D leaky-ReLU grid value") {
  GlmProblem p;
  p.X = vec({0.5, -1.2, 2.0});
  p.w_star = vec({0.7});
  p.link = LinkFunction::leaky_relu(0.5);
  p.y = (p.X * p.w_star).unaryExpr([&](double z) { return p.link.eval(z); });
  const Objective f = empirical_objective(p);
  PointSet grid;
  for (int i = 0; i < 10000; ++i) grid.push_back(vec({-5.0 + 10.0 * i / 9999.0}));
  CHECK(estimate_rho(f, p.w_star, grid) == doctest::Approx(1.2348420334265306).epsilon(1e-10));
}

TEST_CASE("strong quasar check examples") {
  const Objective f = half_norm(3);
  const PointSet pts = some_points(3);
  const Vec zero = Vec::Zero(3);
  const CertReport eq = check_strong_quasar(f, zero, 1.0, 1.0, pts);
  CHECK(eq.holds);
  CHECK(std::abs(eq.worst_margin) <= 1e-12);
  CHECK_FALSE(check_strong_quasar(f, zero, 1.0, 2.0, pts).holds);
}

TEST_CASE("one-point, PL and QG examples") {
  const Objective f = half_norm(2);
  const PointSet pts = some_points(2);
  const Vec zero = Vec::Zero(2);
  CHECK(check_one_point_convex(f, zero, 1.0, pts).holds);
  CHECK_FALSE(check_one_point_convex(f, zero, 1.5, pts).holds);
  CHECK(check_pl(f, 0.0, 1.0, pts).holds);
  CHECK(check_qg(f, zero, 1.0, pts).holds);
  CHECK_FALSE(check_pl(f, 0.0, 2.0, pts).holds);
  CHECK_FALSE(check_qg(f, zero, 2.0, pts).holds);
}

TEST_CASE("ReLU GLM is one-point convex near w*") {
  SeededRng rng(2, 2);
  const GlmProblem p = generate_problem(rng, 2000, 5, LinkFunction::relu());
  const Objective f = empirical_objective(p);
  const PointSet pts = sample_ball(rng, p.w_star, 0.3 * p.w_star.norm(), 300);
  const CertReport probe = check_one_point_convex(f, p.w_star, 1e-12, pts);
  REQUIRE(probe.estimated_constant > 0.0);
  CHECK(check_one_point_convex(f, p.w_star, 0.5 * probe.estimated_constant, pts).holds);
}

TEST_CASE("constant conversions") {
  CHECK(coherence_to_quasar(1, 1) == 1.0);
  CHECK(coherence_to_quasar(0.25, 0.5) == 0.5);
  CHECK(coherence_to_quasar(2, 4) == 0.5);
  CHECK(glm_quasar_constant(1, 1) == 2.0);
  CHECK(glm_quasar_constant(0.5, 1) == 0.5);
  CHECK(glm_quasar_constant(0.1, 1) == doctest::Approx(0.02));
  CHECK(one_point_to_strong_quasar(1, 1, 2) == std::pair{0.5, 2.0});
  CHECK(one_point_to_strong_quasar(2, 0.5, 2) == std::pair{1.0, 0.5});
  const auto near1 = one_point_to_strong_quasar(1, 1, 1 + 1e-9);
  CHECK(near1.first == doctest::Approx(1.0));
  CHECK(near1.second == doctest::Approx(0.0));
  CHECK_THROWS_AS(one_point_to_strong_quasar(1, 1, 1.0), InvalidArgument);
  CHECK(qg_to_strong_quasar(1, 1, 0.5) == std::pair{0.5, 1.0});
  CHECK(qg_to_strong_quasar(2, 1, 0.5) == std::pair{1.0, 1.0});
  CHECK_THROWS_AS(qg_to_strong_quasar(1, 1, 1.0), InvalidArgument);
  CHECK(glm_qg_constant(1, 1) == 1.0);
  CHECK(glm_qg_constant(0.5, 2) == 0.5);
}

TEST_CASE("QG constant for the identity link approaches 1") {
  SeededRng rng(3, 9);
  const GlmProblem p = generate_problem(rng, 20000, 3, LinkFunction::identity());
  CHECK(std::abs(glm_qg_constant(1.0, min_second_moment_eigenvalue(p.X)) - 1.0) <= 0.05);
}

TEST_CASE("composition: one-point + quasar => strong quasar, QG + quasar => strong quasar") {
  const Objective f = half_norm(3);
  const PointSet pts = some_points(3);
  const Vec zero = Vec::Zero(3);
  const double rho_hat = estimate_rho(f, zero, pts);
  REQUIRE(check_quasar(f, zero, rho_hat, pts).holds);
  REQUIRE(check_one_point_convex(f, zero, 1.0, pts).holds);
  REQUIRE(check_qg(f, zero, 1.0, pts).holds);
  const auto [r1, m1] = one_point_to_strong_quasar(rho_hat, 1.0, 2.0);
  CHECK(check_strong_quasar(f, zero, r1, m1, pts).holds);
  const auto [r2, m2] = qg_to_strong_quasar(rho_hat, 1.0, 0.5);
  CHECK(check_strong_quasar(f, zero, r2, m2, pts).holds);
  // strong certificate implies the plain one at the same rho
  CHECK(check_quasar(f, zero, r1, pts).holds);
}

TEST_CASE("coherence witness implies quasar convexity") {
  const Objective f = half_norm(2, 3.0);
  CoherenceWitness wit;
  wit.h = [](const Vec& w, const Vec& ws) { return (w - ws).squaredNorm(); };
  wit.C_v = 3.0;
  wit.C_l = 1.5;
  const PointSet pts = some_points(2);
  REQUIRE(check_coherence(f, Vec::Zero(2), wit, pts).holds);
  CHECK(check_quasar(f, Vec::Zero(2), coherence_to_quasar(wit.C_v, wit.C_l), pts).holds);
  wit.C_v = 4.0;
  CHECK_FALSE(check_coherence(f, Vec::Zero(2), wit, pts).holds);
}

TEST_CASE("ReLU generalized smoothness constant") {
  GlmProblem one;
  one.X = vec({3.0});
  one.w_star = vec({1.0});
  one.link = LinkFunction::relu();
  one.y = vec({3.0});
  CHECK(relu_gen_smooth_constant(one) == 4.5);
  SeededRng rng(4, 1);
  const GlmProblem p = generate_problem(rng, 1000, 50, LinkFunction::relu());
  CHECK(std::abs(relu_gen_smooth_constant(p) - 25.0) <= 1.0);
}

TEST_CASE("phase retrieval C_R") {
  SeededRng rng(5, 1);
  GlmProblem p = generate_problem(rng, 100000, 1, LinkFunction::quadratic());
  p.w_star = vec({1.0});
  p.y = (p.X * p.w_star).array().square().matrix();
  SeededRng mc(5, 2);
  CHECK(std::abs(phase_retrieval_cr(p, 0.0, 10, mc) - 12.0) <= 1.0);
  double prev = 0.0;
  for (double R : {0.0, 0.5, 1.0, 2.0}) {
    SeededRng m2(5, 3);
    const double c = phase_retrieval_cr(p, R, 20, m2);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("smoothness estimate") {
  SeededRng rng(6, 1);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int i = 0; i < 20; ++i) pairs.emplace_back(rng.normal_vector(3), rng.normal_vector(3));
  CHECK(estimate_smoothness_L(half_norm(3, 2.5), pairs) == doctest::Approx(2.5).epsilon(1e-12));
  const Objective affine(3, [](const Vec& w) { return w.sum(); }, [](const Vec& w) { return Vec::Ones(w.size()); });
  CHECK(estimate_smoothness_L(affine, pairs) == 0.0);
  CHECK_THROWS_AS(estimate_smoothness_L(affine, {{Vec::Zero(3), Vec::Zero(3)}}), InsufficientSamples);

  // identity-link GLM: the Hessian is X^T X / n, so the sup ratio is its top eigenvalue
  const GlmProblem p = generate_problem(rng, 200, 3, LinkFunction::identity());
  const Objective f = empirical_objective(p);
  const Mat G = p.X.transpose() * p.X / 200.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(G);
  const Vec top = es.eigenvectors().col(2);
  pairs.emplace_back(top, Vec::Zero(3));
  CHECK(estimate_smoothness_L(f, pairs) == doctest::Approx(es.eigenvalues()(2)).epsilon(1e-10));
}

TEST_CASE("constants validation and JSON report") {
  QuasarConstants q{2.0, 0.5, 1.0};
  CHECK(q.outside_strong_regime());
  QuasarConstants bad{0.0, 0.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  const CertReport r = check_quasar(half_norm(2), Vec::Zero(2), 1.0, some_points(2, 10));
  const auto j = to_json(r);
  CHECK(j.at("property") == "quasar");
  CHECK(j.at("holds") == true);
  CHECK(j.at("points_tested") == 10);
}
