#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "quasar/continuized.hpp"

using namespace quasar;
using qt::vec;

namespace {

Objective flat(Eigen::Index d) {
  return Objective(d, [](const Vec&) { return 1.0; }, [](const Vec& w) { return Vec::Zero(w.size()); });
}

RunOptions quiet(const Vec& w_star) {
  RunOptions o;
  o.w_star = w_star;
  o.wall_time = false;
  return o;
}

}  // namespace

TEST_CASE("quasar step parameters") {
  const StepParams a = quasar_step_params(2, 1, 1, 2);
  CHECK(a.tau == 0.5);
  CHECK(a.tau_prime == 0.0);
  CHECK(a.gamma == 1.0);
  CHECK(a.gamma_prime == 1.0);
  const StepParams b = quasar_step_params(1, 4, 1, 2);
  CHECK(b.tau == 0.75);
  CHECK(b.gamma == 0.25);
  CHECK(b.gamma_prime == 0.125);
  CHECK(quasar_step_params(1, 1, 1, 1 + 1e-12).tau < 1e-11);
  CHECK(quasar_step_params(0.5, 1, 0, 1).tau == 1.0);
  CHECK_THROWS_AS(quasar_step_params(1, 1, 2, 2), InvalidArgument);
  CHECK_THROWS_AS(quasar_step_params(1, 1, 3, 2), InvalidArgument);
}

TEST_CASE("strong quasar step parameters") {
  const StepParams z = strong_quasar_step_params(0.5, 1, 10, 0);
  CHECK(z.tau == 0.0);
  CHECK(z.tau_prime == 0.0);
  const StepParams inf = strong_quasar_step_params(1, 1, 1, 1e6);
  CHECK(inf.tau == doctest::Approx(0.5));
  CHECK(inf.tau_prime == doctest::Approx(1.0));
  const StepParams e = strong_quasar_step_params(1, 1, 4, std::log(2.0));
  CHECK(e.tau == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(e.tau_prime == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(e.gamma == 0.25);
  CHECK(e.gamma_prime == 0.5);
}

TEST_CASE("mixing coefficients stay in [0, 1]") {
  SeededRng rng(1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double rho = 0.01 + 2 * rng.uniform_open0();
    const double t0 = 10 * rng.uniform_open0();
    const double t1 = t0 + sample_increment(rng);
    const StepParams q = quasar_step_params(rho, 1, t0, t1);
    const StepParams s = strong_quasar_step_params(std::min(rho, 1.0), 0.1, 10, t1 - t0);
    for (double v : {q.tau, q.tau_prime, s.tau, s.tau_prime}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("zero gradients: w relaxes toward z0, z stays put") {
  SeededRng rng(2, 2);
  const JumpSchedule sch = build_schedule(rng, 200);
  const Vec w0 = vec({1.0, 2.0}), z0 = vec({-1.0, 0.5});
  RunOptions o;
  o.keep_states = true;
  o.wall_time = false;
  const RunTrace t = continuized_run(flat(2), w0, z0, sch, quasar_schedule(1, 1), 200, o);
  for (const StateSample& s : t.states) CHECK(s.z == z0);
  // tau_0 = 1 (T_0 = 0) collapses w onto z in the first step
  CHECK((t.states[1].w - z0).norm() <= 1e-15);
  const RunTrace u = continuized_run(flat(2), w0, z0, sch, strong_quasar_schedule(1, 1, 100), 200, o);
  CHECK((u.final_w - z0).norm() < (w0 - z0).norm());
}

TEST_CASE("quadratic with mu = L is solved in one step") {
  const Vec w_star = vec({1.0, -2.0, 0.5});
  const Objective f = qt::half_norm(3, 4.0);
  const Objective g(3, [&](const Vec& w) { return f.value(w - w_star); },
                    [&](const Vec& w) { return f.gradient(w - w_star); });
  SeededRng rng(3, 3);
  const Vec w0 = vec({0.3, 0.2, 0.1});
  const RunTrace t = continuized_run(g, w0, w0, build_schedule(rng, 1), strong_quasar_schedule(1, 4, 4), 1,
                                     quiet(w_star));
  CHECK((t.final_w - w_star).norm() <= 1e-14);
}

TEST_CASE("one gradient call per iteration") {
  SeededRng rng(4, 4);
  const Objective f = qt::half_norm(5, 2.0);
  const Vec w0 = Vec::Ones(5);
  const RunTrace t = continuized_run(f, w0, w0, build_schedule(rng, 50), strong_quasar_schedule(0.5, 0.1, 2), 50,
                                     quiet(Vec::Zero(5)));
  CHECK(t.counter.grad_calls == 50);
  for (const TraceRow& r : t.rows) CHECK(r.grad_calls == r.k);
  CHECK(t.rows.size() == 51);
}

TEST_CASE("Euler relaxation matches the closed form") {
  const Vec w0 = vec({1.0}), z0 = vec({-1.0});
  ContinuousParams p{[](double) { return 0.5; }, [](double) { return 0.0; }, [](double) { return 0.0; },
                     [](double) { return 0.0; }};
  const auto out = simulate_continuized_euler(flat(1), w0, z0, JumpSchedule({2.0}), p, 1e-4, 1);
  CHECK(std::abs(out[0].w(0) - (-0.26424111765711533)) <= 1e-4);
  CHECK(out[0].z(0) == -1.0);
}

TEST_CASE("strong schedule: discrete iterates match Euler, error ~ linear in dt") {
  const Objective g = diagonal_quadratic(vec({1.0, 100.0}), vec({1.0, -1.0}));
  SeededRng rng(5, 5);
  const JumpSchedule sch = build_schedule(rng, 20);
  const Vec w0 = vec({0.5, 0.25});
  const double e1 = discretization_gap(g, w0, w0, sch, 1, 1, 100, 4e-4, 20);
  const double e2 = discretization_gap(g, w0, w0, sch, 1, 1, 100, 2e-4, 20);
  const double e3 = discretization_gap(g, w0, w0, sch, 1, 1, 100, 1e-4, 20);
  CHECK(e3 <= 1e-3);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(e2 / e3 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("k = 200 final f-gap matches the Richardson-extrapolated Euler oracle") {
  const Vec w_star = vec({1.0, -1.0});
  // slow enough (rho = 0.1) that the k = 200 gap is far above round-off
  const Objective g = diagonal_quadratic(vec({1.0, 100.0}), w_star);
  SeededRng rng(6, 6);
  const JumpSchedule sch = build_schedule(rng, 200);
  const Vec w0 = vec({0.5, 0.25});
  const double rho = 0.1, mu = 1, L = 100;
  const RunTrace t = continuized_run(g, w0, w0, sch, strong_quasar_schedule(rho, mu, L), 200, quiet(w_star));
  const auto cp = strong_quasar_continuous_params(rho, mu, L);
  const double coarse = g.value(simulate_continuized_euler(g, w0, w0, sch, cp, 1e-3, 200).back().w);
  const double fine = g.value(simulate_continuized_euler(g, w0, w0, sch, cp, 5e-4, 200).back().w);
  const double extrapolated = 2 * fine - coarse;
  MESSAGE("k=200 gap " << t.rows.back().f_gap << ", Euler " << coarse << " / " << fine << " -> " << extrapolated);
  CHECK(std::abs(t.rows.back().f_gap - extrapolated) <= 1e-6 * t.rows.back().f_gap);
}

TEST_CASE("quasar schedule from T_0 > 0 matches Euler as dt shrinks") {
  const Vec w_star = vec({1.0, -1.0});
  const Objective g = diagonal_quadratic(vec({1.0, 10.0}), w_star);
  SeededRng rng(7, 7);
  const JumpSchedule sch = build_schedule(rng, 20).shifted(1.0);
  const Vec w0 = vec({0.5, 0.25});
  RunOptions o = quiet(w_star);
  o.keep_states = true;
  o.t_start = 1.0;
  const RunTrace t = continuized_run(g, w0, w0, sch, quasar_schedule(1, 10), 20, o);
  double prev = 1e300;
  for (double dt : {4e-4, 2e-4, 1e-4}) {
    const auto e = simulate_continuized_euler(g, w0, w0, sch, quasar_continuous_params(1, 10), dt, 20, 1.0);
    double worst = 0.0;
    for (std::size_t k = 1; k <= 20; ++k)
      worst = std::max(worst, ((t.states[k].w - e[k - 1].w).norm() + (t.states[k].z - e[k - 1].z).norm()) /
                                  (t.states[k].w.norm() + t.states[k].z.norm()));
    CHECK(worst < prev);
    prev = worst;
  }
  CHECK(prev <= 1e-3);
}

TEST_CASE("gradient descent examples") {
  const Objective f = qt::half_norm(2);
  const Vec w0 = vec({3.0, -1.0});
  CHECK(gd_run(f, w0, 1.0, 1, quiet(Vec::Zero(2))).final_w.norm() == 0.0);
  const RunTrace still = gd_run(f, w0, 0.0, 5, quiet(Vec::Zero(2)));
  for (const TraceRow& r : still.rows) CHECK(r.f_gap == still.rows.front().f_gap);
  const RunTrace geo = gd_run(qt::half_norm(1), vec({2.0}), 0.1, 10, quiet(Vec::Zero(1)));
  CHECK(geo.final_w(0) == doctest::Approx(std::pow(0.9, 10) * 2.0).epsilon(1e-14));
  CHECK(std::isnan(geo.rows.front().T));
}

TEST_CASE("divergence keeps the trace and the last finite state") {
  const Objective f = qt::half_norm(2);
  try {
    gd_run(f, vec({1.0, 1.0}), 10.0, 1000, quiet(Vec::Zero(2)));
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(!e.trace().rows.empty());
    CHECK(e.last_w().allFinite());
  }
}

TEST_CASE("quasar schedule beats GD on an ill-conditioned quadratic") {
  Vec diag(10);
  for (int i = 0; i < 10; ++i) diag(i) = std::pow(100.0, i / 9.0);
  const Objective f = diagonal_quadratic(diag, Vec::Zero(10));
  int wins = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    SeededRng rng(8, s);
    const Vec w0 = rng.normal_vector(10);
    const RunTrace acc = continuized_run(f, w0, w0, build_schedule(rng, 200), quasar_schedule(1, 100), 200,
                                         quiet(Vec::Zero(10)));
    const RunTrace gd = gd_run(f, w0, 1.0 / 100, 200, quiet(Vec::Zero(10)));
    wins += acc.rows.back().f_gap < gd.rows.back().f_gap ? 1 : 0;
  }
  CHECK(wins >= 6);
}

TEST_CASE("Lyapunov potential: initial value, zero at optimum, ensemble supermartingale") {
  const Vec w_star = vec({1.0, -1.0});
  const Objective g = diagonal_quadratic(vec({1.0, 20.0}), w_star);
  const double rho = 1, mu = 1, L = 20;
  const Vec w0 = vec({0.0, 0.0});
  const StateSample s0{0, 0.0, w0, w0};
  const auto phi0 = lyapunov_monitor_strong(g, {s0}, rho, mu, L, w_star, 0.0);
  CHECK(phi0[0] == doctest::Approx(g.value(w0) + 0.5 * mu * (w0 - w_star).squaredNorm()));
  const StateSample opt{5, 3.0, w_star, w_star};
  CHECK(lyapunov_monitor_strong(g, {opt}, rho, mu, L, w_star, 0.0)[0] == 0.0);

  const int seeds = 1000, K = 30;
  std::vector<std::vector<double>> phis;
  for (int s = 0; s < seeds; ++s) {
    SeededRng rng(9, static_cast<std::uint64_t>(s));
    RunOptions o = quiet(w_star);
    o.keep_states = true;
    const RunTrace t = continuized_run(g, w0, w0, build_schedule(rng, K), strong_quasar_schedule(rho, mu, L), K, o);
    phis.push_back(lyapunov_monitor_strong(g, t.states, rho, mu, L, w_star, 0.0));
  }
  for (int k = 0; k < K; ++k) {
    double m = 0, m2 = 0;
    for (const auto& p : phis) {
      const double d = p[k + 1] - p[k];
      m += d / seeds;
      m2 += d * d / seeds;
    }
    const double se = std::sqrt(std::max(0.0, m2 - m * m) / seeds);
    CHECK(m <= 2 * se + 1e-15);
  }
}
