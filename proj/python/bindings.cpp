// Python bindings for the quasar core library.
#include <limits>
#include <optional>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "quasar/bench.hpp"
#include "quasar/continuized.hpp"
#include "quasar/hss.hpp"
#include "quasar/problem_io.hpp"
#include "quasar/quasar_analysis.hpp"

namespace py = pybind11;
using namespace quasar;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict run_columns(const RunTrace& t) {
  const std::size_t n = t.rows.size();
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 1> k(n), calls(n);
  Vec T(n), time_s(n), gap(n), dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TraceRow& r = t.rows[i];
    const auto j = static_cast<Eigen::Index>(i);
    k(j) = r.k, calls(j) = r.grad_calls, T(j) = r.T, time_s(j) = r.time_s, gap(j) = r.f_gap, dist(j) = r.dist;
  }
  py::dict d;
  d["k"] = k, d["T_k"] = T, d["grad_calls"] = calls, d["time_s"] = time_s, d["f_gap"] = gap, d["dist"] = dist;
  d["final_w"] = t.final_w;
  return d;
}

py::dict recovery_columns(const RecoveryTrace& t) {
  const std::size_t n = t.rows.size();
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 1> k(n), calls(n);
  Vec T(n), dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const RecoveryRow& r = t.rows[i];
    const auto j = static_cast<Eigen::Index>(i);
    k(j) = r.k, calls(j) = r.pg_calls, T(j) = r.T, dist(j) = r.dist;
  }
  py::dict d;
  d["k"] = k, d["T_k"] = T, d["pg_calls"] = calls, d["dist"] = dist;
  d["final_w"] = t.final_w;
  return d;
}

ExperimentConfig problem_config(const std::string& link, double alpha, std::size_t n, std::size_t d,
                                std::uint64_t seed) {
  ExperimentConfig c;
  c.link = parse_link_kind(link);
  c.alpha = alpha;
  c.n = n;
  c.d = d;
  c.seed = seed;
  return c;
}

double need(const std::optional<double>& v, const char* name, const std::string& algo) {
  if (!v) throw InvalidArgument(algo + " requires " + name);
  return *v;
}

py::dict run(const GlmProblem& problem, const std::string& algo_name, std::optional<double> L,
             std::optional<double> mu, std::optional<double> rho, std::optional<double> step, std::size_t iters,
             std::optional<std::uint64_t> grad_budget, double eps, std::uint64_t record_every, std::uint64_t seed,
             std::uint64_t stream) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  RunSpec spec;
  spec.algo = parse_algo(algo_name);
  spec.iters = iters;
  spec.grad_budget = grad_budget;
  spec.eps = eps;
  spec.record_every = record_every;
  spec.wall_time = false;
  switch (spec.algo) {
    case Algo::continuized_strong:
    case Algo::hss_strong:
      spec.point = {need(L, "L", algo_name), need(mu, "mu", algo_name), need(rho, "rho", algo_name)};
      break;
    case Algo::continuized_quasar:
    case Algo::hss_quasar:
      spec.point = {need(L, "L", algo_name), kNaN, need(rho, "rho", algo_name)};
      break;
    case Algo::gd:
    case Algo::glmtron:
      spec.point = {step ? 1.0 / *step : need(L, "L or step", algo_name), kNaN, kNaN};
      break;
    case Algo::accel_glmtron:
      spec.point = {kNaN, kNaN, kNaN};
      break;
  }
  const Objective obj = empirical_objective(problem);
  RunResult res;
  {
    py::gil_scoped_release release;
    res = execute_run(problem, obj, spec, seed, stream);
  }
  py::dict out = is_recovery(spec.algo) ? recovery_columns(res.recovery) : run_columns(res.trace);
  out["algo"] = algo_name;
  out["diverged"] = res.diverged;
  out["error"] = res.error;
  out["final_metric"] = res.final_metric;
  return out;
}

py::dict step_params_dict(const StepParams& s) {
  py::dict d;
  d["tau"] = s.tau, d["tau_prime"] = s.tau_prime, d["gamma"] = s.gamma, d["gamma_prime"] = s.gamma_prime;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Continuized Nesterov acceleration for (strongly) quasar-convex objectives";

  // translators run most-recent first, so the subclass goes last
  py::register_exception<Error>(m, "QuasarError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  py::class_<GlmProblem>(m, "Problem")
      .def_readonly("X", &GlmProblem::X)
      .def_readonly("y", &GlmProblem::y)
      .def_readonly("w_star", &GlmProblem::w_star)
      .def_property_readonly("link", [](const GlmProblem& p) { return to_string(p.link.kind()); })
      .def_property_readonly("n", &GlmProblem::n)
      .def_property_readonly("d", &GlmProblem::d)
      .def("value", [](const GlmProblem& p, const Vec& w) { return empirical_objective(p).value(w); }, py::arg("w"))
      .def("gradient", [](const GlmProblem& p, const Vec& w) { return empirical_objective(p).gradient(w); },
           py::arg("w"))
      .def("save", [](const GlmProblem& p, const std::filesystem::path& stem) { write_problem(p, stem); },
           py::arg("stem"));

  m.def(
      "generate_problem",
      [](const std::string& link, std::size_t n, std::size_t d, std::uint64_t seed, double alpha) {
        return experiment_problem(problem_config(link, alpha, n, d, seed));
      },
      py::arg("link") = "logistic", py::arg("n") = 1000, py::arg("d") = 50, py::arg("seed") = 1,
      py::arg("alpha") = 0.5, "Synthetic GLM problem, identical to `quasar-opt generate` with the same flags.");
  m.def("load_problem", [](const std::filesystem::path& stem) { return read_problem(stem); }, py::arg("stem"));

  m.def("run", &run, py::arg("problem"), py::arg("algo"), py::kw_only(), py::arg("L") = py::none(),
        py::arg("mu") = py::none(), py::arg("rho") = py::none(), py::arg("step") = py::none(),
        py::arg("iters") = 1000, py::arg("grad_budget") = py::none(), py::arg("eps") = 1e-8,
        py::arg("record_every") = 1, py::arg("seed") = 1, py::arg("stream") = 0,
        "One run; returns the trace as a dict of numpy columns. Divergence is reported, not raised.");

  m.def(
      "run_grid",
      [](const std::string& config_text, std::optional<std::filesystem::path> out) {
        const ExperimentConfig cfg = ExperimentConfig::parse(config_text);
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(cfg);
        }
        if (out) emit_report(res, *out);
        py::dict best;
        for (const AlgoResult& a : res.algos) {
          py::dict b;
          b["L"] = a.best.L, b["mu"] = a.best.mu, b["rho"] = a.best.rho, b["score"] = a.best_score;
          best[py::str(to_string(a.algo))] = b;
        }
        return best;
      },
      py::arg("config"), py::arg("out") = py::none(),
      "Grid search from `key = value` config text; writes the report when `out` is given.");

  m.def(
      "check",
      [](const GlmProblem& problem, const std::string& property, std::optional<double> rho, std::optional<double> mu,
         std::optional<double> cv, std::optional<double> nu, std::size_t points, std::optional<double> radius,
         std::uint64_t seed) {
        const Objective obj = empirical_objective(problem);
        SeededRng rng(seed, fnv1a64("check"));
        const Vec w0 = initial_point(rng, problem.d());
        const double r = radius.value_or(3.0 * (w0 - problem.w_star).norm());
        const PointSet pts = sample_ball(rng, problem.w_star, r, points);
        CertReport rep;
        if (property == "quasar")
          rep = check_quasar(obj, problem.w_star, rho ? *rho : estimate_rho(obj, problem.w_star, pts), pts);
        else if (property == "strong-quasar")
          rep = check_strong_quasar(obj, problem.w_star, need(rho, "rho", property), need(mu, "mu", property), pts);
        else if (property == "one-point")
          rep = check_one_point_convex(obj, problem.w_star, need(cv, "cv", property), pts);
        else if (property == "pl")
          rep = check_pl(obj, obj.value(problem.w_star), need(nu, "nu", property), pts);
        else if (property == "qg")
          rep = check_qg(obj, problem.w_star, need(nu, "nu", property), pts);
        else
          throw InvalidArgument("unknown property '" + property + "'");
        return json_to_py(to_json(rep));
      },
      py::arg("problem"), py::arg("property") = "quasar", py::kw_only(), py::arg("rho") = py::none(),
      py::arg("mu") = py::none(), py::arg("cv") = py::none(), py::arg("nu") = py::none(), py::arg("points") = 1000,
      py::arg("radius") = py::none(), py::arg("seed") = 1);

  m.def(
      "jump_times",
      [](std::uint64_t seed, std::uint64_t stream, std::size_t k) {
        SeededRng rng(seed, stream);
        const JumpSchedule s = build_schedule(rng, k);
        return std::vector<double>(s.times().begin(), s.times().end());
      },
      py::arg("seed"), py::arg("stream"), py::arg("k"), "T_1 < ... < T_k of a unit-rate Poisson clock.");
  m.def("quasar_step_params",
        [](double rho, double L, double T_k, double T_next) {
          return step_params_dict(quasar_step_params(rho, L, T_k, T_next));
        },
        py::arg("rho"), py::arg("L"), py::arg("T_k"), py::arg("T_next"));
  m.def("strong_quasar_step_params",
        [](double rho, double mu, double L, double dT) {
          return step_params_dict(strong_quasar_step_params(rho, mu, L, dT));
        },
        py::arg("rho"), py::arg("mu"), py::arg("L"), py::arg("dT"));
  m.def("hss_theta_sequence", &hss_theta_sequence, py::arg("count"));
  m.def("algorithms", [] {
    std::vector<std::string> names;
    for (Algo a : {Algo::continuized_quasar, Algo::continuized_strong, Algo::gd, Algo::hss_strong, Algo::hss_quasar,
                   Algo::glmtron, Algo::accel_glmtron})
      names.push_back(to_string(a));
    return names;
  });
}
